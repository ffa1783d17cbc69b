#include "hopqa/tags.hpp"

#include <array>
#include <charconv>

#include "hopqa/error.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

namespace {

struct Span {
  std::size_t open = 0;   // position of '<'
  std::size_t end = 0;    // one past the closing '>'
  std::string_view inner;
};

std::optional<Span> find_span(std::string_view raw, std::string_view name, std::size_t from) {
  const std::string open = "<" + std::string(name) + ">";
  const std::string close = "</" + std::string(name) + ">";
  while (true) {
    const auto o = raw.find(open, from);
    if (o == std::string_view::npos) return std::nullopt;
    const auto start = o + open.size();
    const auto c = raw.find(close, start);
    if (c == std::string_view::npos) return std::nullopt;
    // A nested opener before the closer means the first opener is unterminated.
    const auto again = raw.find(open, start);
    if (again != std::string_view::npos && again < c) {
      from = again;
      continue;
    }
    return Span{o, c + close.size(), raw.substr(start, c - start)};
  }
}

bool parse_int(std::string_view s, int& out) {
  s = text::trim(s);
  if (s.empty()) return false;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Cursor over the body of an <action> block.
class CallScanner {
 public:
  explicit CallScanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' ||
                                s_[pos_] == '\n'))
      ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat_word(std::string_view w) {
    skip_ws();
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  std::optional<std::string_view> until(char c) {
    const auto e = s_.find(c, pos_);
    if (e == std::string_view::npos) return std::nullopt;
    auto out = s_.substr(pos_, e - pos_);
    pos_ = e + 1;
    return out;
  }
  std::optional<std::string> quoted() {
    if (!eat('"')) return std::nullopt;
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        out.push_back(s_[pos_++]);
      } else if (c == '"') {
        return out;
      } else {
        out.push_back(c);
      }
    }
    return std::nullopt;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

[[noreturn]] void malformed_action(const std::string& why) {
  throw Error(ErrorCode::MalformedAction, "malformed planner action: " + why);
}

std::vector<Subquestion> parse_action_block(std::string_view body, std::size_t candidate_count) {
  std::vector<Subquestion> out;
  CallScanner scan(body);
  while (!scan.done()) {
    if (!scan.eat_word("Search") || !scan.eat('(') || !scan.eat('['))
      malformed_action("expected Search([i], \"question\")");
    const auto index_text = scan.until(']');
    int index = 0;
    if (!index_text || !parse_int(*index_text, index))
      malformed_action("candidate index is not an integer");
    if (!scan.eat(',')) malformed_action("expected ',' after candidate index");
    auto question = scan.quoted();
    if (!question) malformed_action("expected a quoted question");
    if (!scan.eat(')')) malformed_action("expected ')'");
    const auto q = std::string(text::trim(*question));
    if (q.empty()) malformed_action("empty search question");
    if (index < 0 || static_cast<std::size_t>(index) >= candidate_count)
      throw Error(ErrorCode::IndexOutOfRange,
                  "Search references candidate [" + std::to_string(index) + "] but only " +
                      std::to_string(candidate_count) + " candidates exist");
    out.push_back({static_cast<std::size_t>(index), q});
  }
  if (out.empty()) malformed_action("<action> holds no Search calls");
  return out;
}

std::string escape_quotes(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view env_kind_name(EnvKind k) noexcept { return k == EnvKind::kg ? "kg" : "text"; }

EnvKind parse_env_kind(std::string_view name) {
  if (name == "kg") return EnvKind::kg;
  if (name == "text") return EnvKind::text;
  throw Error(ErrorCode::ConfigError, "unknown environment kind '" + std::string(name) + "'");
}

std::optional<std::string> first_tag(std::string_view raw, std::string_view name) {
  auto span = find_span(raw, name, 0);
  if (!span) return std::nullopt;
  return std::string(text::trim(span->inner));
}

std::vector<std::string> all_tags(std::string_view raw, std::string_view name) {
  std::vector<std::string> out;
  std::size_t from = 0;
  while (auto span = find_span(raw, name, from)) {
    out.emplace_back(text::trim(span->inner));
    from = span->end;
  }
  return out;
}

PlannerAction parse_planner_action(std::string_view raw, EnvKind kind,
                                   std::size_t candidate_count) {
  PlannerAction action;
  action.think = first_tag(raw, "think");

  if (auto answer = first_tag(raw, "answer")) {
    if (answer->empty()) malformed_action("empty <answer>");
    action.kind = ActionKind::Answer;
    action.answer = std::move(answer);
    return action;
  }

  action.kind = ActionKind::Search;
  if (kind == EnvKind::text) {
    for (auto& q : all_tags(raw, "search")) {
      if (q.empty()) malformed_action("empty <search>");
      action.subquestions.push_back({std::nullopt, std::move(q)});
    }
    if (action.subquestions.empty()) malformed_action("no <search> or <answer> tag");
  } else {
    auto block = find_span(raw, "action", 0);
    if (!block) malformed_action("no <action> or <answer> tag");
    action.subquestions = parse_action_block(block->inner, candidate_count);
  }
  return action;
}

std::string render_planner_action(const PlannerAction& action, EnvKind kind) {
  std::string out;
  if (action.think) out += "<think>\n" + *action.think + "\n</think>\n";
  if (action.kind == ActionKind::Answer) {
    out += "<answer>" + action.answer.value_or("") + "</answer>";
    return out;
  }
  if (kind == EnvKind::text) {
    for (std::size_t i = 0; i < action.subquestions.size(); ++i) {
      if (i) out += '\n';
      out += "<search>" + action.subquestions[i].question + "</search>";
    }
  } else {
    out += "<action>\n";
    for (const auto& sq : action.subquestions) {
      out += "Search([" + std::to_string(sq.candidate.value_or(0)) + "], \"" +
             escape_quotes(sq.question) + "\")\n";
    }
    out += "</action>";
  }
  return out;
}

WorkerReply parse_worker_reply(std::string_view raw) {
  auto fail = [](const std::string& why) -> WorkerReply {
    throw Error(ErrorCode::MalformedReply, "malformed worker reply: " + why);
  };
  WorkerReply reply;
  reply.think = first_tag(raw, "think");
  const auto select = first_tag(raw, "select");
  if (!select) return fail("missing <select>");
  const auto sentence = first_tag(raw, "sentence");
  if (!sentence) return fail("missing <sentence>");
  if (sentence->empty()) return fail("empty <sentence>");

  std::string_view rest = *select;
  while (!(rest = text::trim(rest)).empty()) {
    if (rest.front() != '[') return fail("expected '[' in <select>");
    const auto close = rest.find(']');
    if (close == std::string_view::npos) return fail("unterminated index in <select>");
    int index = 0;
    if (!parse_int(rest.substr(1, close - 1), index)) return fail("non-integer index in <select>");
    if (index < -1) return fail("negative index in <select>");
    reply.selected.push_back(index);
    rest.remove_prefix(close + 1);
  }
  if (reply.selected.empty()) return fail("empty <select>");
  if (reply.selected.size() > 1) {
    for (int i : reply.selected)
      if (i == -1) return fail("[-1] combined with other indices");
  }
  reply.sentence = *sentence;
  return reply;
}

std::string render_worker_reply(const WorkerReply& reply) {
  std::string out;
  if (reply.think) out += "<think>" + *reply.think + "</think>\n";
  out += "<select>";
  for (int i : reply.selected) out += "[" + std::to_string(i) + "]";
  out += "</select>\n<sentence>" + reply.sentence + "</sentence>";
  return out;
}

std::vector<std::string> tag_structure(std::string_view raw) {
  static constexpr std::array<std::string_view, 6> kNames = {"think",  "search", "answer",
                                                              "action", "select", "sentence"};
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::optional<Span> best;
    std::string_view best_name;
    for (auto name : kNames) {
      auto span = find_span(raw, name, pos);
      if (span && (!best || span->open < best->open)) {
        best = span;
        best_name = name;
      }
    }
    if (!best) break;
    out.emplace_back(best_name);
    if (best_name == "action") {
      std::string_view body = best->inner;
      for (auto p = body.find("Search("); p != std::string_view::npos;
           p = body.find("Search(", p + 1))
        out.emplace_back("Search");
    }
    pos = best->end;
  }
  return out;
}

}  // namespace hopqa

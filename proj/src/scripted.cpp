#include "hopqa/scripted.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "hopqa/error.hpp"
#include "hopqa/seed.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

namespace {

std::string_view match_name(MatchKind m) {
  switch (m) {
    case MatchKind::exact: return "exact";
    case MatchKind::substring: return "substring";
    case MatchKind::position: return "position";
  }
  return "substring";
}

MatchKind parse_match(const std::string& s) {
  if (s == "exact") return MatchKind::exact;
  if (s == "substring") return MatchKind::substring;
  if (s == "position" || s == "sequence-position") return MatchKind::position;
  throw Error(ErrorCode::ParseError, "unknown matcher '" + s + "'");
}

bool matches(const ScriptedRule& rule, const std::vector<Message>& messages) {
  if (!rule.scope.empty()) {
    if (messages.empty() || messages.front().role != Role::system ||
        messages.front().content.find(rule.scope) == std::string::npos)
      return false;
  }
  switch (rule.matcher) {
    case MatchKind::exact:
      return !messages.empty() && messages.back().content == rule.pattern;
    case MatchKind::substring:
      return !messages.empty() && messages.back().content.find(rule.pattern) != std::string::npos;
    case MatchKind::position: {
      std::size_t want = 0;
      const auto* b = rule.pattern.data();
      auto [ptr, ec] = std::from_chars(b, b + rule.pattern.size(), want);
      if (ec != std::errc{} || ptr != b + rule.pattern.size()) return false;
      std::size_t assistants = 0;
      for (const auto& m : messages) assistants += m.role == Role::assistant;
      return assistants == want;
    }
  }
  return false;
}

}  // namespace

void to_json(nlohmann::json& j, const ScriptedRule& rule) {
  j = nlohmann::json{{"match", match_name(rule.matcher)}, {"pattern", rule.pattern}};
  if (!rule.scope.empty()) j["scope"] = rule.scope;
  if (rule.responses.size() == 1) {
    j["response"] = rule.responses.front().text;
  } else {
    auto arr = nlohmann::json::array();
    for (const auto& r : rule.responses) arr.push_back({{"text", r.text}, {"weight", r.weight}});
    j["responses"] = std::move(arr);
  }
}

void from_json(const nlohmann::json& j, ScriptedRule& rule) {
  rule.matcher = parse_match(j.value("match", "substring"));
  rule.pattern = j.at("pattern").is_string() ? j.at("pattern").get<std::string>() : j.at("pattern").dump();
  rule.scope = j.value("scope", "");
  rule.responses.clear();
  if (j.contains("response")) rule.responses.push_back({j.at("response").get<std::string>(), 1.0});
  if (j.contains("responses"))
    for (const auto& r : j.at("responses"))
      rule.responses.push_back({r.at("text").get<std::string>(), r.value("weight", 1.0)});
}

void validate_rules(const std::vector<ScriptedRule>& rules) {
  if (rules.empty()) throw Error(ErrorCode::InvalidInput, "scripted backend needs at least one rule");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if (r.responses.empty())
      throw Error(ErrorCode::InvalidInput, "rule " + std::to_string(i) + " has no responses");
    if (r.responses.size() > 1) {
      double sum = 0.0;
      for (const auto& w : r.responses) {
        if (!(w.weight >= 0.0)) throw Error(ErrorCode::InvalidInput, "negative response weight");
        sum += w.weight;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidInput,
                    "rule " + std::to_string(i) + " weights sum to " + std::to_string(sum));
    }
  }
}

std::vector<ScriptedRule> parse_script(std::istream& in) {
  std::vector<ScriptedRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      rules.push_back(nlohmann::json::parse(line).get<ScriptedRule>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "script line " + std::to_string(lineno) + ": " + std::string(e.what()));
    }
  }
  validate_rules(rules);
  return rules;
}

std::vector<ScriptedRule> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open script " + path.string());
  return parse_script(in);
}

std::string scripted_chat(const std::vector<ScriptedRule>& rules,
                          const std::vector<Message>& messages, std::uint64_t seed) {
  for (const auto& rule : rules) {
    if (!matches(rule, messages)) continue;
    if (rule.responses.size() == 1) return rule.responses.front().text;

    std::uint64_t h = seed;
    for (const auto& m : messages) h = fnv1a64(m.content, h ^ static_cast<std::uint64_t>(m.role));
    std::mt19937_64 rng(splitmix64(h));
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (const auto& r : rule.responses) {
      acc += r.weight;
      if (u < acc) return r.text;
    }
    return rule.responses.back().text;
  }
  throw Error(ErrorCode::NoRuleMatched,
              "no scripted rule matches the conversation (last message: " +
                  (messages.empty() ? std::string("<none>") : messages.back().content.substr(0, 80)) +
                  ")");
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules) : rules_(std::move(rules)) {
  validate_rules(rules_);
}

std::string ScriptedBackend::chat(const ChatRequest& req) const {
  validate(req);
  ++calls_;
  return scripted_chat(rules_, req.messages, req.seed.value_or(0));
}

}  // namespace hopqa

#include "hopqa/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include <unicode/uchar.h>

#include "hopqa/error.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

namespace {

bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

bool is_space(char32_t c) {
  const auto u = static_cast<UChar32>(c);
  return u_isUWhiteSpace(u) || u_isspace(u);
}

}  // namespace

std::string NormalizedAnswer::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

NormalizedAnswer normalize_answer(std::string_view raw) {
  NormalizedAnswer out;
  std::u32string current;
  auto flush = [&] {
    if (current.empty()) return;
    auto token = text::encode_utf8(current);
    current.clear();
    if (!is_article(token)) out.tokens.push_back(std::move(token));
  };
  for (char32_t c : text::decode_utf8(raw)) {
    const auto u = static_cast<UChar32>(c);
    if (u_ispunct(u)) continue;
    if (is_space(c)) {
      flush();
      continue;
    }
    current.push_back(static_cast<char32_t>(u_tolower(u)));
  }
  flush();
  return out;
}

int exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

double f1(std::string_view pred, std::string_view gold) {
  const auto p = normalize_answer(pred).tokens;
  const auto g = normalize_answer(gold).tokens;
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;

  std::unordered_map<std::string, long> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  long common = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

ScorePair score(std::string_view pred, std::string_view gold) {
  return {exact_match(pred, gold), f1(pred, gold)};
}

double round_percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

AggregateScore aggregate(const std::vector<ScorePair>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySet, "cannot aggregate an empty set of scores");
  double em = 0.0;
  double f = 0.0;
  for (const auto& s : scores) {
    em += s.em;
    f += s.f1;
  }
  const auto n = static_cast<double>(scores.size());
  return {round_percent(em / n), round_percent(f / n), scores.size()};
}

AggregateScore aggregate(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<ScorePair> scores;
  scores.reserve(pairs.size());
  for (const auto& [pred, gold] : pairs) scores.push_back(score(pred, gold));
  return aggregate(scores);
}

}  // namespace hopqa

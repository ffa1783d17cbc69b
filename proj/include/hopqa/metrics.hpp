#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hopqa {

// Lowercased tokens with punctuation (Unicode P*) and articles removed.
struct NormalizedAnswer {
  std::vector<std::string> tokens;

  std::string joined() const;
  bool operator==(const NormalizedAnswer&) const = default;
};

struct ScorePair {
  int em = 0;
  double f1 = 0.0;
};

struct AggregateScore {
  double em = 0.0;  // percent, two decimals
  double f1 = 0.0;  // percent, two decimals
  std::size_t count = 0;
};

NormalizedAnswer normalize_answer(std::string_view raw);

int exact_match(std::string_view pred, std::string_view gold);

// Token-level F1 over the normalized bags. Two empty answers score 1.
double f1(std::string_view pred, std::string_view gold);

ScorePair score(std::string_view pred, std::string_view gold);

// Throws Error(EmptySet) on an empty list.
AggregateScore aggregate(const std::vector<std::pair<std::string, std::string>>& pairs);
AggregateScore aggregate(const std::vector<ScorePair>& scores);

double round_percent(double fraction);

}  // namespace hopqa

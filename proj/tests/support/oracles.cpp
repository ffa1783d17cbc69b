#include "oracles.hpp"

#include <cmath>

namespace hopqa::testing {

double brute_force_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::vector<bool> used(gold.size(), false);
  std::size_t common = 0;
  for (const auto& p : pred) {
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (!used[j] && gold[j] == p) {
        used[j] = true;
        ++common;
        break;
      }
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2 * precision * recall / (precision + recall);
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

std::string BagCase::pred_text() const { return join(pred); }
std::string BagCase::gold_text() const { return join(gold); }

BagCase random_bag_case(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab = {"river", "town", "north", "john", "smith",
                                                 "1971", "film", "żuławski", "of"};
  std::uniform_int_distribution<std::size_t> len(0, 6);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  BagCase c;
  for (std::size_t i = len(rng); i > 0; --i) c.pred.push_back(vocab[pick(rng)]);
  for (std::size_t i = len(rng); i > 0; --i) c.gold.push_back(vocab[pick(rng)]);
  return c;
}

double threshold_formula(double k_prev, double mean, double r_sup) {
  const double candidate = mean / (r_sup + 1.0) * r_sup;
  return k_prev > candidate ? k_prev : candidate;
}

double simulate_mean_attempts(double p, std::size_t m, std::size_t max_attempts,
                              std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t kept = 0;
    std::size_t attempts = 0;
    while (kept < m && attempts < max_attempts) {
      ++attempts;
      if (coin(rng)) ++kept;
    }
    total += static_cast<double>(attempts);
  }
  return total / static_cast<double>(trials);
}

double bm25_reference(const std::vector<std::vector<std::string>>& docs, std::size_t doc,
                      const std::vector<std::string>& query, double k1, double b) {
  const double n_docs = static_cast<double>(docs.size());
  double avg = 0.0;
  for (const auto& d : docs) avg += static_cast<double>(d.size());
  avg /= n_docs;
  double score = 0.0;
  for (const auto& term : query) {
    double df = 0.0;
    for (const auto& d : docs) {
      for (const auto& w : d) {
        if (w == term) {
          df += 1.0;
          break;
        }
      }
    }
    double tf = 0.0;
    for (const auto& w : docs[doc])
      if (w == term) tf += 1.0;
    const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    const double len = static_cast<double>(docs[doc].size());
    score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
  }
  return score;
}

}  // namespace hopqa::testing

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

namespace hopqa {

struct ThresholdUpdate {
  std::size_t iteration = 0;
  double k = 0.0;           // threshold after the update
  double batch_mean = 0.0;  // mean first-pass reward of the batch

  bool operator==(const ThresholdUpdate&) const = default;
};

// Progressive selection threshold. k never decreases and never exceeds r_sup.
struct ThresholdState {
  double k = 0.5;
  double r_sup = 1.0;
  std::vector<ThresholdUpdate> history;

  bool operator==(const ThresholdState&) const = default;
};

// (mean / (r_sup + 1)) * r_sup
double threshold_candidate(double batch_mean, double r_sup);

// k := max(k, (mean / (r_sup + 1)) * r_sup), history appended.
// Throws EmptyBatch, or InvalidInput when r_sup <= 0.
ThresholdState update_threshold(ThresholdState state, const std::vector<double>& batch_rewards);

// {"k", "r_sup", "history": [[iter, k, mean], ...]}
void to_json(nlohmann::json& j, const ThresholdState& s);
void from_json(const nlohmann::json& j, ThresholdState& s);
void save_threshold(const std::filesystem::path& path, const ThresholdState& s);
ThresholdState load_threshold(const std::filesystem::path& path);

}  // namespace hopqa

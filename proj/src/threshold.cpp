#include "hopqa/threshold.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "hopqa/error.hpp"

namespace hopqa {

double threshold_candidate(double batch_mean, double r_sup) {
  return batch_mean / (r_sup + 1.0) * r_sup;
}

ThresholdState update_threshold(ThresholdState state, const std::vector<double>& batch_rewards) {
  if (batch_rewards.empty()) throw Error(ErrorCode::EmptyBatch, "threshold update needs a non-empty batch");
  if (!(state.r_sup > 0.0)) throw Error(ErrorCode::InvalidInput, "r_sup must be positive");
  const double mean = std::accumulate(batch_rewards.begin(), batch_rewards.end(), 0.0) /
                      static_cast<double>(batch_rewards.size());
  state.k = std::max(state.k, threshold_candidate(mean, state.r_sup));
  state.history.push_back({state.history.size() + 1, state.k, mean});
  return state;
}

void to_json(nlohmann::json& j, const ThresholdState& s) {
  auto hist = nlohmann::json::array();
  for (const auto& h : s.history) hist.push_back({h.iteration, h.k, h.batch_mean});
  j = nlohmann::json{{"k", s.k}, {"r_sup", s.r_sup}, {"history", std::move(hist)}};
}

void from_json(const nlohmann::json& j, ThresholdState& s) {
  s.k = j.at("k").get<double>();
  s.r_sup = j.at("r_sup").get<double>();
  s.history.clear();
  for (const auto& h : j.at("history"))
    s.history.push_back({h.at(0).get<std::size_t>(), h.at(1).get<double>(), h.at(2).get<double>()});
}

void save_threshold(const std::filesystem::path& path, const ThresholdState& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write threshold state " + path.string());
  out << nlohmann::json(s).dump(2) << '\n';
}

ThresholdState load_threshold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open threshold state " + path.string());
  try {
    return nlohmann::json::parse(in).get<ThresholdState>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("threshold state: ") + e.what());
  }
}

}  // namespace hopqa

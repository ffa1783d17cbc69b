#include "hopqa/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "hopqa/error.hpp"

namespace hopqa::theory {

void RewardLandscape::validate() const {
  if (atoms.empty()) throw Error(ErrorCode::InvalidInput, "landscape has no atoms");
  for (const auto& [r, m] : atoms) {
    if (!std::isfinite(r)) throw Error(ErrorCode::InvalidInput, "landscape reward is not finite");
    if (m == 0) throw Error(ErrorCode::InvalidInput, "landscape multiplicity must be positive");
  }
}

double RewardLandscape::sup() const {
  validate();
  double best = atoms.front().first;
  for (const auto& a : atoms) best = std::max(best, a.first);
  return best;
}

double RewardLandscape::inf() const {
  validate();
  double low = atoms.front().first;
  for (const auto& a : atoms) low = std::min(low, a.first);
  return low;
}

void to_json(nlohmann::json& j, const RewardLandscape& l) {
  j = nlohmann::json{{"atoms", nlohmann::json::array()}};
  for (const auto& [r, m] : l.atoms) j["atoms"].push_back({r, m});
}

void from_json(const nlohmann::json& j, RewardLandscape& l) {
  l.atoms.clear();
  for (const auto& a : j.at("atoms")) {
    if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::ParseError, "atom must be [reward, multiplicity]");
    const auto m = a[1].get<double>();
    if (m < 1 || m != std::floor(m)) throw Error(ErrorCode::InvalidInput, "multiplicity must be a positive integer");
    l.atoms.emplace_back(a[0].get<double>(), static_cast<std::uint64_t>(m));
  }
  l.validate();
}

RewardLandscape load_landscape(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open landscape " + path.string());
  try {
    return nlohmann::json::parse(in).get<RewardLandscape>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("landscape: ") + e.what());
  }
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
}

// log-weight of each atom including multiplicity; -inf when filtered out.
std::vector<double> log_terms(const RewardLandscape& l, double alpha, double k) {
  std::vector<double> out;
  out.reserve(l.atoms.size());
  for (const auto& [r, m] : l.atoms)
    out.push_back(r > k ? r / alpha + std::log(static_cast<double>(m))
                        : -std::numeric_limits<double>::infinity());
  return out;
}

double log_sum_exp(const std::vector<double>& xs) {
  const double top = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

double partition(const RewardLandscape& l, double alpha) {
  check_alpha(alpha);
  l.validate();
  return log_sum_exp(log_terms(l, alpha, -std::numeric_limits<double>::infinity()));
}

double truncated_partition(const RewardLandscape& l, double alpha, double k) {
  check_alpha(alpha);
  l.validate();
  if (!(l.sup() > k)) throw Error(ErrorCode::EmptyTruncation, "no atom above the threshold");
  return log_sum_exp(log_terms(l, alpha, k));
}

std::vector<double> truncated_weights(const RewardLandscape& l, double alpha, double k) {
  const double log_zk = truncated_partition(l, alpha, k);
  std::vector<double> w;
  w.reserve(l.atoms.size());
  for (const auto& [r, m] : l.atoms) w.push_back(r > k ? std::exp(r / alpha - log_zk) : 0.0);
  return w;
}

KlRoutes kl_routes(const RewardLandscape& l, double alpha, double k) {
  const double log_z = partition(l, alpha);
  const double log_zk = truncated_partition(l, alpha, k);
  KlRoutes out;
  out.by_identity = log_z - log_zk;
  // sum over surviving trajectories of p_k * log(p_k / p), p_k = e^{r/a}/Z^{>k}, p = e^{r/a}/Z
  double kl = 0.0;
  for (const auto& [r, m] : l.atoms) {
    if (!(r > k)) continue;
    const double log_pk = r / alpha - log_zk;
    const double log_p = r / alpha - log_z;
    kl += static_cast<double>(m) * std::exp(log_pk) * (log_pk - log_p);
  }
  out.by_definition = kl;
  return out;
}

double kl_truncated(const RewardLandscape& l, double alpha, double k) {
  const auto routes = kl_routes(l, alpha, k);
  if (std::abs(routes.by_definition - routes.by_identity) >= 1e-9)
    throw std::logic_error("KL routes disagree");
  return routes.by_identity;
}

double variance_truncated(const RewardLandscape& l, double alpha, double k) {
  const auto w = truncated_weights(l, alpha, k);
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    mean += static_cast<double>(l.atoms[i].second) * w[i] * l.atoms[i].first;
  // Central second moment avoids cancellation when the mass concentrates.
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = l.atoms[i].first - mean;
    var += static_cast<double>(l.atoms[i].second) * w[i] * d * d;
  }
  return var;
}

double min_threshold_for_delta(const RewardLandscape& l, double alpha, double delta) {
  check_alpha(alpha);
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidInput, "delta must be positive");
  l.validate();
  std::set<double> rewards;
  for (const auto& a : l.atoms) rewards.insert(a.first);
  // Boundaries just below each distinct reward, highest first. The KL is a
  // step function of k that only changes at these points.
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) {
    const double k = std::nextafter(*it, -std::numeric_limits<double>::infinity());
    if (kl_truncated(l, alpha, k) < delta) return k;
  }
  return std::nextafter(*rewards.begin(), -std::numeric_limits<double>::infinity());
}

std::vector<ReportRow> report(const RewardLandscape& l, const std::vector<double>& alphas,
                              const std::vector<double>& ks) {
  std::vector<ReportRow> rows;
  for (double k : ks)
    for (double a : alphas)
      rows.push_back({a, k, partition(l, a), truncated_partition(l, a, k), kl_truncated(l, a, k),
                      variance_truncated(l, a, k)});
  return rows;
}

}  // namespace hopqa::theory

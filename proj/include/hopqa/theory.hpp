#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace hopqa::theory {

// A finite reward landscape: distinct trajectories grouped by reward.
struct RewardLandscape {
  std::vector<std::pair<double, std::uint64_t>> atoms;  // (reward, multiplicity)

  // Throws InvalidInput on no atoms, non-finite rewards or zero multiplicity.
  void validate() const;
  double sup() const;
  double inf() const;
};

void to_json(nlohmann::json& j, const RewardLandscape& l);
void from_json(const nlohmann::json& j, RewardLandscape& l);
RewardLandscape load_landscape(const std::filesystem::path& path);

// log Z(alpha) = log sum m * exp(r / alpha). Throws NonPositiveAlpha.
double partition(const RewardLandscape& l, double alpha);

// log Z over atoms with r > k. Throws EmptyTruncation when none survive.
double truncated_partition(const RewardLandscape& l, double alpha, double k);

// Truncated Boltzmann probability of one trajectory at each atom (0 for
// atoms at or below k), in atom order.
std::vector<double> truncated_weights(const RewardLandscape& l, double alpha, double k);

// Both sides of the KL identity.
struct KlRoutes {
  double by_definition = 0.0;
  double by_identity = 0.0;  // log Z - log Z^{>k}
};
KlRoutes kl_routes(const RewardLandscape& l, double alpha, double k);

// KL(pi^{>k} || pi*). Throws std::logic_error if the two routes disagree by
// more than 1e-9.
double kl_truncated(const RewardLandscape& l, double alpha, double k);

// Var[r] under pi^{>k}.
double variance_truncated(const RewardLandscape& l, double alpha, double k);

// Largest atom-boundary threshold with KL < delta. Throws InvalidInput for delta <= 0.
double min_threshold_for_delta(const RewardLandscape& l, double alpha, double delta);

struct ReportRow {
  double alpha = 0.0;
  double k = 0.0;
  double log_z = 0.0;
  double log_z_trunc = 0.0;
  double kl = 0.0;
  double variance = 0.0;
};

std::vector<ReportRow> report(const RewardLandscape& l, const std::vector<double>& alphas,
                              const std::vector<double>& ks);

}  // namespace hopqa::theory

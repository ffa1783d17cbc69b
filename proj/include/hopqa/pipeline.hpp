#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopqa/agent.hpp"
#include "hopqa/sampler.hpp"
#include "hopqa/sft.hpp"
#include "hopqa/threshold.hpp"

namespace hopqa {

struct BatchReport {
  std::size_t iteration = 0;
  std::size_t questions = 0;
  std::size_t attempted = 0;   // episodes run
  std::size_t accepted = 0;    // trajectories kept
  double mean_reward = 0.0;    // mean first-attempt reward (threshold input)
  double k_before = 0.0;
  double k_after = 0.0;
  std::size_t records = 0;     // SFT lines written
  std::filesystem::path dataset;
  std::vector<std::string> accepted_ids;  // question id per kept trajectory, in order
};

void to_json(nlohmann::ordered_json& j, const BatchReport& r);

struct PipelineOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::string> trainer_hook;
  std::uint64_t seed = 0;
  bool shuffle = true;  // seeded shuffle before the contiguous split
};

// Seeded permutation of the question list.
std::vector<QAInstance> shuffled(std::vector<QAInstance> questions, std::uint64_t seed);

// T contiguous batches whose sizes differ by at most one.
std::vector<std::vector<QAInstance>> partition_batches(const std::vector<QAInstance>& questions,
                                                      std::size_t batches);

struct HookResult {
  int exit_code = 0;
  std::string last_line;  // last non-empty stdout line
};

// Runs `<command> --data '<path>' --iteration <n>` and captures stdout.
HookResult run_trainer_hook(const std::string& command, const std::filesystem::path& data,
                            std::size_t iteration);

struct OnlineResult {
  std::vector<BatchReport> reports;
  ThresholdState threshold;
  bool aborted = false;
  std::string error;  // set when aborted
};

// Per iteration: sample with the current k, update k from first-attempt
// rewards, select with the updated k, emit iter_<n>.jsonl, persist
// threshold.json, then run the trainer hook. A failing hook stops the loop
// with the reports gathered so far. Throws InvalidInput unless
// |questions| >= batches >= 1.
OnlineResult run_online(const std::vector<QAInstance>& questions, std::size_t batches,
                        const EnvironmentProvider& envs, ChatBackend& llm,
                        const EpisodeLimits& limits, const SamplerConfig& cfg,
                        AgentOptions opts, const PipelineOptions& popts);

// One pass with k fixed at cfg.k_init; writes dataset.jsonl.
BatchReport run_offline(const std::vector<QAInstance>& questions, const EnvironmentProvider& envs,
                        const ChatBackend& llm, const EpisodeLimits& limits,
                        const SamplerConfig& cfg, const AgentOptions& opts,
                        const PipelineOptions& popts);

}  // namespace hopqa

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hopqa/agent.hpp"
#include "hopqa/environment.hpp"

namespace hopqa {

struct SamplerConfig {
  std::size_t m = 3;               // trajectories kept per question
  std::size_t max_attempts = 16;
  std::size_t batch_size = 1000;   // questions per online iteration
  double k_init = 0.5;
  double temperature = kSamplingTemperature;
  double r_sup = 1.0;              // supremum of the reward (F1)
  bool dedupe = false;             // drop repeated (answer, messages) within a question
  std::size_t concurrency = 1;     // questions sampled in parallel

  // Throws InvalidInput unless 1 <= m <= max_attempts, batch_size >= 1,
  // temperature >= 0, r_sup > 0 and k_init <= r_sup.
  void validate() const;
};

struct SampleOutcome {
  std::string question_id;
  std::vector<Trajectory> kept;  // reward strictly above k
  std::size_t attempts = 0;
  double first_reward = 0.0;     // reward of the first attempt
  std::vector<double> rewards;   // one per attempt
};

// Runs scored episodes until m are kept or max_attempts are spent. Episode
// errors count as failed attempts with reward 0.
SampleOutcome sample_question(const QAInstance& q, const Environment& env, const ChatBackend& llm,
                              const EpisodeLimits& limits, const SamplerConfig& cfg,
                              const AgentOptions& opts, double k);

// sample_question over a batch, up to cfg.concurrency questions at a time.
// Results are in input order and independent of scheduling.
std::vector<SampleOutcome> sample_batch(const std::vector<QAInstance>& questions,
                                        const EnvironmentProvider& envs, const ChatBackend& llm,
                                        const EpisodeLimits& limits, const SamplerConfig& cfg,
                                        const AgentOptions& opts, double k);

}  // namespace hopqa

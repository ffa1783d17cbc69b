#include "hopqa/sampler.hpp"

#include <atomic>
#include <algorithm>
#include <set>
#include <thread>

#include "hopqa/error.hpp"
#include "hopqa/seed.hpp"

namespace hopqa {

void SamplerConfig::validate() const {
  if (m < 1 || m > max_attempts)
    throw Error(ErrorCode::InvalidInput, "sampler requires 1 <= m <= max_attempts");
  if (batch_size < 1) throw Error(ErrorCode::InvalidInput, "batch_size must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidInput, "temperature must be >= 0");
  if (!(r_sup > 0.0)) throw Error(ErrorCode::InvalidInput, "r_sup must be positive");
  if (!(k_init <= r_sup)) throw Error(ErrorCode::InvalidInput, "k_init must not exceed r_sup");
}

namespace {

std::string dedupe_key(const Trajectory& t) {
  std::string key = t.final_answer.value_or("");
  for (const auto& m : t.messages) {
    key.push_back('\x1f');
    key += m.content;
  }
  return key;
}

}  // namespace

SampleOutcome sample_question(const QAInstance& q, const Environment& env, const ChatBackend& llm,
                              const EpisodeLimits& limits, const SamplerConfig& cfg,
                              const AgentOptions& opts, double k) {
  cfg.validate();
  SampleOutcome out;
  out.question_id = q.id;
  std::set<std::string> seen;
  const auto qhash = fnv1a64(q.id);

  while (out.kept.size() < cfg.m && out.attempts < cfg.max_attempts) {
    AgentOptions attempt_opts = opts;
    attempt_opts.temperature = cfg.temperature;
    attempt_opts.seed = derive_seed(opts.seed, {qhash, out.attempts});
    ++out.attempts;

    Trajectory t;
    try {
      t = score_trajectory(run_episode(q, env, llm, limits, attempt_opts), q.answer());
    } catch (const std::exception&) {
      out.rewards.push_back(0.0);
      continue;
    }
    const double r = t.reward.value_or(0.0);
    out.rewards.push_back(r);
    if (!(r > k)) continue;
    if (cfg.dedupe && !seen.insert(dedupe_key(t)).second) continue;
    out.kept.push_back(std::move(t));
  }
  out.first_reward = out.rewards.empty() ? 0.0 : out.rewards.front();
  return out;
}

std::vector<SampleOutcome> sample_batch(const std::vector<QAInstance>& questions,
                                        const EnvironmentProvider& envs, const ChatBackend& llm,
                                        const EpisodeLimits& limits, const SamplerConfig& cfg,
                                        const AgentOptions& opts, double k) {
  cfg.validate();
  std::vector<SampleOutcome> results(questions.size());
  auto work = [&](std::size_t i) {
    const auto& q = questions[i];
    try {
      auto env = envs.for_question(q);
      results[i] = sample_question(q, *env, llm, limits, cfg, opts, k);
    } catch (const std::exception&) {
      // No environment for this question; nothing was attempted.
      results[i] = SampleOutcome{};
      results[i].question_id = q.id;
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(1, cfg.concurrency), questions.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < questions.size(); ++i) work(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < questions.size(); i = next++) work(i);
    });
  pool.clear();
  return results;
}

}  // namespace hopqa

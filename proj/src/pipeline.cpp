#include "hopqa/pipeline.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <numeric>
#include <random>

#include "hopqa/error.hpp"
#include "hopqa/seed.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

void to_json(nlohmann::ordered_json& j, const BatchReport& r) {
  j = nlohmann::ordered_json{{"iteration", r.iteration},   {"questions", r.questions},
                     {"attempted", r.attempted},   {"accepted", r.accepted},
                     {"mean_reward", r.mean_reward}, {"k_before", r.k_before},
                     {"k_after", r.k_after},       {"records", r.records},
                     {"dataset", r.dataset.filename().string()}};
}

std::vector<QAInstance> shuffled(std::vector<QAInstance> questions, std::uint64_t seed) {
  // Fisher-Yates with an explicit engine so the order is portable.
  std::mt19937_64 rng(seed);
  for (std::size_t i = questions.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(questions[i - 1], questions[j]);
  }
  return questions;
}

std::vector<std::vector<QAInstance>> partition_batches(const std::vector<QAInstance>& questions,
                                                      std::size_t batches) {
  if (batches < 1 || questions.size() < batches)
    throw Error(ErrorCode::InvalidInput, "need |questions| >= T >= 1");
  std::vector<std::vector<QAInstance>> out(batches);
  const std::size_t base = questions.size() / batches;
  const std::size_t extra = questions.size() % batches;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t n = base + (b < extra ? 1 : 0);
    out[b].assign(questions.begin() + static_cast<std::ptrdiff_t>(pos),
                  questions.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

struct Selection {
  std::vector<SftRecord> records;
  std::vector<std::string> accepted_ids;
  std::size_t attempted = 0;
  std::vector<double> first_rewards;
};

Selection select_batch(const std::vector<SampleOutcome>& outcomes, double k) {
  Selection s;
  for (const auto& o : outcomes) {
    s.attempted += o.attempts;
    if (o.attempts > 0) s.first_rewards.push_back(o.first_reward);
    for (const auto& t : o.kept) {
      auto units = select_training_units(t, k);
      if (units.empty()) continue;
      s.accepted_ids.push_back(t.question_id);
      s.records.insert(s.records.end(), std::make_move_iterator(units.begin()),
                       std::make_move_iterator(units.end()));
    }
  }
  return s;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

HookResult run_trainer_hook(const std::string& command, const std::filesystem::path& data,
                            std::size_t iteration) {
  const std::string cmd = command + " --data " + shell_quote(data.string()) + " --iteration " +
                          std::to_string(iteration);
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw Error(ErrorCode::HookFailed, "cannot start trainer hook: " + command);
  std::string output;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
  const int status = ::pclose(pipe);

  HookResult r;
  r.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  std::size_t end = output.size();
  while (end > 0) {
    const auto start = output.rfind('\n', end - 1);
    const std::size_t from = start == std::string::npos ? 0 : start + 1;
    auto line = text::trim(std::string_view(output).substr(from, end - from));
    if (!line.empty()) {
      r.last_line = std::string(line);
      break;
    }
    if (start == std::string::npos) break;
    end = start;
  }
  return r;
}

OnlineResult run_online(const std::vector<QAInstance>& questions, std::size_t batches,
                        const EnvironmentProvider& envs, ChatBackend& llm,
                        const EpisodeLimits& limits, const SamplerConfig& cfg,
                        AgentOptions opts, const PipelineOptions& popts) {
  cfg.validate();
  limits.validate();
  auto ordered = popts.shuffle ? shuffled(questions, popts.seed) : questions;
  const auto parts = partition_batches(ordered, batches);
  std::filesystem::create_directories(popts.out_dir);

  OnlineResult result;
  result.threshold.k = cfg.k_init;
  result.threshold.r_sup = cfg.r_sup;

  for (std::size_t it = 0; it < parts.size(); ++it) {
    BatchReport rep;
    rep.iteration = it;
    rep.questions = parts[it].size();
    rep.k_before = result.threshold.k;

    AgentOptions iter_opts = opts;
    iter_opts.seed = derive_seed(popts.seed, {0x6f6e6c696e65ULL, it});
    const auto outcomes = sample_batch(parts[it], envs, llm, limits, cfg, iter_opts, rep.k_before);

    std::vector<double> first;
    for (const auto& o : outcomes)
      if (o.attempts > 0) first.push_back(o.first_reward);
    if (!first.empty()) result.threshold = update_threshold(result.threshold, first);
    if (!result.threshold.history.empty()) result.threshold.history.back().iteration = it;
    rep.k_after = result.threshold.k;

    auto sel = select_batch(outcomes, rep.k_after);
    rep.attempted = sel.attempted;
    rep.accepted = sel.accepted_ids.size();
    rep.accepted_ids = std::move(sel.accepted_ids);
    rep.mean_reward = mean(sel.first_rewards);
    rep.dataset = popts.out_dir / ("iter_" + std::to_string(it) + ".jsonl");
    rep.records = emit_sft(sel.records, rep.dataset);
    save_threshold(popts.out_dir / "threshold.json", result.threshold);
    result.reports.push_back(rep);

    if (popts.trainer_hook) {
      HookResult hook;
      try {
        hook = run_trainer_hook(*popts.trainer_hook, rep.dataset, it);
      } catch (const Error& e) {
        result.aborted = true;
        result.error = e.what();
        return result;
      }
      if (hook.exit_code != 0) {
        result.aborted = true;
        result.error = "trainer hook exited with status " + std::to_string(hook.exit_code) +
                       " at iteration " + std::to_string(it);
        return result;
      }
      if (hook.last_line.starts_with("http://") || hook.last_line.starts_with("https://")) {
        llm.rebind(hook.last_line);
      } else if (!hook.last_line.empty()) {
        opts.model = hook.last_line;
      }
    }
  }
  return result;
}

BatchReport run_offline(const std::vector<QAInstance>& questions, const EnvironmentProvider& envs,
                        const ChatBackend& llm, const EpisodeLimits& limits,
                        const SamplerConfig& cfg, const AgentOptions& opts,
                        const PipelineOptions& popts) {
  cfg.validate();
  limits.validate();
  std::filesystem::create_directories(popts.out_dir);
  auto ordered = popts.shuffle ? shuffled(questions, popts.seed) : questions;

  BatchReport rep;
  rep.questions = ordered.size();
  rep.k_before = rep.k_after = cfg.k_init;

  AgentOptions run_opts = opts;
  run_opts.seed = derive_seed(popts.seed, {0x6f6e6c696e65ULL, 0});
  const auto outcomes = sample_batch(ordered, envs, llm, limits, cfg, run_opts, cfg.k_init);
  auto sel = select_batch(outcomes, cfg.k_init);
  rep.attempted = sel.attempted;
  rep.accepted = sel.accepted_ids.size();
  rep.accepted_ids = std::move(sel.accepted_ids);
  rep.mean_reward = mean(sel.first_rewards);
  rep.dataset = popts.out_dir / "dataset.jsonl";
  rep.records = emit_sft(sel.records, rep.dataset);
  return rep;
}

}  // namespace hopqa

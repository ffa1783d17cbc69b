#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopqa/corpus.hpp"
#include "hopqa/environment.hpp"
#include "hopqa/llm.hpp"
#include "hopqa/message.hpp"
#include "hopqa/prompts.hpp"
#include "hopqa/tags.hpp"

namespace hopqa {

inline constexpr std::string_view kNoInformation = "No relevant information found.";

struct EpisodeLimits {
  std::size_t max_iterations = 6;
  std::size_t top_k = 5;
  std::size_t max_searches_per_turn = 4;

  // Throws InvalidInput unless every limit is >= 1.
  void validate() const;
};

struct AgentOptions {
  std::string model = "default";
  double temperature = kEvalTemperature;
  int max_tokens = kDefaultMaxTokens;
  bool few_shot = true;
  bool parallel_workers = true;
  std::uint64_t seed = 0;
  PromptSet prompts;
};

enum class WorkerStatus { ok, no_materials, unparsable, failed };

std::string_view worker_status_name(WorkerStatus s) noexcept;

struct WorkerTask {
  std::string question;
  std::optional<std::string> entity;  // KG handle being visited
};

struct WorkerCall {
  std::size_t iteration = 0;
  std::string subquestion;
  std::optional<std::string> entity;
  std::vector<Material> materials;
  std::vector<Message> prompt;  // system + user with materials; never the few-shot dialogue
  std::string reply_raw;
  std::vector<int> selected;
  std::string sentence;
  WorkerStatus status = WorkerStatus::ok;
  std::string error;

  // A worker trajectory usable as training data.
  bool trainable() const noexcept { return status == WorkerStatus::ok; }
};

enum class EpisodeStatus { answered, iteration_limit, malformed, backend_error };

std::string_view episode_status_name(EpisodeStatus s) noexcept;

// One planner conversation. messages[0] is the system prompt, followed by the
// optional few-shot dialogue, the question, then alternating assistant/user turns.
struct Trajectory {
  std::string question_id;
  std::string question;
  std::vector<Message> messages;
  std::size_t few_shot_messages = 0;
  std::optional<std::string> final_answer;
  std::optional<double> reward;
  std::optional<int> em;
  std::vector<WorkerCall> worker_calls;
  std::size_t iterations_used = 0;  // search iterations dispatched
  std::size_t planner_turns = 0;    // assistant turns recorded
  std::size_t repairs = 0;
  EpisodeStatus status = EpisodeStatus::answered;
  std::string error;
  std::vector<std::string> candidates;  // KG handles, in index order
};

void to_json(nlohmann::json& j, const WorkerCall& c);
void from_json(const nlohmann::json& j, WorkerCall& c);
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

// Retrieves materials, asks the worker once (plus one format repair), and
// falls back to [-1] / kNoInformation when nothing usable comes back.
// Backend and retrieval errors propagate.
WorkerCall run_worker(const WorkerTask& task, const Environment& env, const ChatBackend& llm,
                      const EpisodeLimits& limits, const AgentOptions& opts,
                      std::uint64_t seed, std::size_t iteration = 0);

struct Observation {
  std::string text;  // "Obs: " + sentences joined by a space, in dispatch order
  std::vector<WorkerCall> calls;
};

// Runs one iteration's independent worker calls (concurrently when allowed)
// and merges them in dispatch order. A failed call contributes its fallback.
Observation dispatch_iteration(const std::vector<WorkerTask>& tasks, const Environment& env,
                               const ChatBackend& llm, const EpisodeLimits& limits,
                               const AgentOptions& opts, std::size_t iteration);

Trajectory run_episode(const QAInstance& question, const Environment& env, const ChatBackend& llm,
                       const EpisodeLimits& limits, const AgentOptions& opts);

// reward = F1(final_answer, gold), 0 without an answer; EM kept alongside.
Trajectory score_trajectory(Trajectory t, std::string_view gold);

}  // namespace hopqa

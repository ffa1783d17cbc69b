#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopqa/agent.hpp"
#include "hopqa/message.hpp"

namespace hopqa {

inline constexpr std::size_t kWarmupLimitSmall = 300;
inline constexpr std::size_t kWarmupLimitLarge = 1000;

enum class RecordSource { planner, worker };

struct SftMessage {
  Role role = Role::user;
  std::string content;
  bool train = false;  // loss mask: true exactly on agent (assistant) messages

  bool operator==(const SftMessage&) const = default;
};

// One training unit for an external MLE/SFT trainer.
struct SftRecord {
  RecordSource source = RecordSource::planner;
  std::string question_id;
  double reward = 0.0;
  std::vector<SftMessage> messages;

  bool operator==(const SftRecord&) const = default;
};

std::vector<SftMessage> masked(const std::vector<Message>& messages);

// Nothing when reward <= k. Otherwise the planner conversation (few-shot
// dialogue stripped) plus one single-turn record per trainable worker call.
// Throws InvalidInput for an unscored trajectory.
std::vector<SftRecord> select_training_units(const Trajectory& t, double k);

// Uniformly samples up to `limit` EM=1 trajectories (seeded, original order
// kept) and expands each without a threshold.
std::vector<SftRecord> warmup_select(const std::vector<Trajectory>& trajectories,
                                     std::size_t limit, std::uint64_t seed);

// {"source", "question_id", "reward", "messages": [{"role", "content", "train"}]}
nlohmann::ordered_json to_json_line(const SftRecord& r);
SftRecord sft_record_from_json(const nlohmann::json& j);

// JSON-lines; returns the number of lines written. Throws IoError.
std::size_t emit_sft(const std::vector<SftRecord>& records, const std::filesystem::path& path);
std::vector<SftRecord> load_sft(const std::filesystem::path& path);

}  // namespace hopqa

#include "hopqa/sft.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "hopqa/error.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

std::vector<SftMessage> masked(const std::vector<Message>& messages) {
  std::vector<SftMessage> out;
  out.reserve(messages.size());
  for (const auto& m : messages) out.push_back({m.role, m.content, m.role == Role::assistant});
  return out;
}

std::vector<SftRecord> select_training_units(const Trajectory& t, double k) {
  if (!t.reward) throw Error(ErrorCode::InvalidInput, "trajectory '" + t.question_id + "' is not scored");
  const double reward = *t.reward;
  if (!(reward > k)) return {};

  std::vector<SftRecord> out;
  std::vector<Message> planner;
  planner.reserve(t.messages.size());
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    if (i >= 1 && i <= t.few_shot_messages) continue;
    planner.push_back(t.messages[i]);
  }
  out.push_back({RecordSource::planner, t.question_id, reward, masked(planner)});

  for (const auto& call : t.worker_calls) {
    if (!call.trainable()) continue;
    auto msgs = call.prompt;
    msgs.push_back(assistant_message(call.reply_raw));
    out.push_back({RecordSource::worker, t.question_id, reward, masked(msgs)});
  }
  return out;
}

std::vector<SftRecord> warmup_select(const std::vector<Trajectory>& trajectories,
                                     std::size_t limit, std::uint64_t seed) {
  std::vector<std::size_t> exact;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    if (trajectories[i].em.value_or(0) == 1) exact.push_back(i);

  std::vector<std::size_t> chosen;
  if (exact.size() <= limit) {
    chosen = std::move(exact);
  } else {
    std::mt19937_64 rng(seed);
    std::sample(exact.begin(), exact.end(), std::back_inserter(chosen), limit, rng);
  }

  std::vector<SftRecord> out;
  for (auto i : chosen) {
    auto units = select_training_units(trajectories[i], -std::numeric_limits<double>::infinity());
    out.insert(out.end(), std::make_move_iterator(units.begin()), std::make_move_iterator(units.end()));
  }
  return out;
}

nlohmann::ordered_json to_json_line(const SftRecord& r) {
  nlohmann::ordered_json j;
  j["source"] = r.source == RecordSource::planner ? "planner" : "worker";
  j["question_id"] = r.question_id;
  j["reward"] = r.reward;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : r.messages) {
    nlohmann::ordered_json mj;
    mj["role"] = role_name(m.role);
    mj["content"] = m.content;
    mj["train"] = m.train;
    msgs.push_back(std::move(mj));
  }
  j["messages"] = std::move(msgs);
  return j;
}

SftRecord sft_record_from_json(const nlohmann::json& j) {
  SftRecord r;
  const auto source = j.at("source").get<std::string>();
  if (source == "planner") {
    r.source = RecordSource::planner;
  } else if (source == "worker") {
    r.source = RecordSource::worker;
  } else {
    throw Error(ErrorCode::ParseError, "unknown record source '" + source + "'");
  }
  r.question_id = j.at("question_id").get<std::string>();
  r.reward = j.at("reward").get<double>();
  for (const auto& m : j.at("messages"))
    r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>(),
                          m.at("train").get<bool>()});
  return r;
}

std::size_t emit_sft(const std::vector<SftRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write SFT dataset " + path.string());
  std::size_t written = 0;
  for (const auto& r : records) {
    out << to_json_line(r).dump() << '\n';
    ++written;
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
  return written;
}

std::vector<SftRecord> load_sft(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open SFT dataset " + path.string());
  std::vector<SftRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(sft_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("SFT dataset: ") + e.what());
    }
  }
  return out;
}

}  // namespace hopqa

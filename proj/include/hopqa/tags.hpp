#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hopqa {

enum class EnvKind { text, kg };

std::string_view env_kind_name(EnvKind k) noexcept;
EnvKind parse_env_kind(std::string_view name);

// One subquestion handed to a worker. KG planners address a candidate entity
// by its index in the candidate list; text planners leave it unset.
struct Subquestion {
  std::optional<std::size_t> candidate;
  std::string question;

  bool operator==(const Subquestion&) const = default;
};

enum class ActionKind { Search, Answer };

struct PlannerAction {
  std::optional<std::string> think;
  ActionKind kind = ActionKind::Search;
  std::vector<Subquestion> subquestions;
  std::optional<std::string> answer;

  bool operator==(const PlannerAction&) const = default;
};

struct WorkerReply {
  std::optional<std::string> think;
  std::vector<int> selected;
  std::string sentence;

  bool operator==(const WorkerReply&) const = default;
};

// Content of the first well-formed <name>...</name> span, trimmed.
std::optional<std::string> first_tag(std::string_view raw, std::string_view name);

// Contents of every well-formed <name>...</name> span, trimmed, in order.
std::vector<std::string> all_tags(std::string_view raw, std::string_view name);

// Text planners: every <search> span is one query. KG planners: Search([i], "q")
// lines inside <action>. An <answer> span wins over any searches.
// Throws MalformedAction, or IndexOutOfRange for a KG index >= candidate_count.
PlannerAction parse_planner_action(std::string_view raw, EnvKind kind,
                                   std::size_t candidate_count = 0);

std::string render_planner_action(const PlannerAction& action, EnvKind kind);

// Parses <select>[i][j]...</select> and <sentence>...</sentence>.
// [-1] alone means no supporting material. Throws MalformedReply.
WorkerReply parse_worker_reply(std::string_view raw);

std::string render_worker_reply(const WorkerReply& reply);

// Ordered names of the well-formed top-level tag spans in a message, with each
// KG Search(...) call inside <action> reported as "Search".
std::vector<std::string> tag_structure(std::string_view raw);

}  // namespace hopqa

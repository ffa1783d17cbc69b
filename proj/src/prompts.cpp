#include "hopqa/prompts.hpp"

#include <fstream>
#include <sstream>

#include "hopqa/error.hpp"

namespace hopqa::assets {
extern const std::string_view kPlannerText;
extern const std::string_view kWorkerText;
extern const std::string_view kPlannerKg;
extern const std::string_view kWorkerKg;
}  // namespace hopqa::assets

namespace hopqa {

PromptTemplate parse_prompt_template(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    PromptTemplate t;
    t.name = j.at("name").get<std::string>();
    t.version = j.at("version").get<int>();
    const auto role = j.at("role").get<std::string>();
    if (role == "planner") {
      t.role = AgentRole::planner;
    } else if (role == "worker") {
      t.role = AgentRole::worker;
    } else {
      throw Error(ErrorCode::ParseError, "prompt role must be planner or worker");
    }
    t.env = parse_env_kind(j.at("env").get<std::string>());
    t.system = j.at("system").get<std::string>();
    t.context_label = j.value("context_label", "");
    t.format_reminder = j.at("format_reminder").get<std::string>();
    t.few_shot = j.value("few_shot", std::vector<Message>{});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid prompt template: ") + e.what());
  }
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open prompt template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_prompt_template(ss.str());
}

const PromptTemplate& builtin_prompt(AgentRole role, EnvKind env) {
  static const PromptTemplate planner_text = parse_prompt_template(assets::kPlannerText);
  static const PromptTemplate worker_text = parse_prompt_template(assets::kWorkerText);
  static const PromptTemplate planner_kg = parse_prompt_template(assets::kPlannerKg);
  static const PromptTemplate worker_kg = parse_prompt_template(assets::kWorkerKg);
  if (role == AgentRole::planner) return env == EnvKind::kg ? planner_kg : planner_text;
  return env == EnvKind::kg ? worker_kg : worker_text;
}

std::string planner_question(const PromptTemplate& tpl, std::string_view question,
                             const std::vector<std::string>& candidate_labels) {
  std::string out = "Question: " + std::string(question);
  if (tpl.env == EnvKind::kg) {
    out += "\n" + (tpl.context_label.empty() ? std::string("Candidate:") : tpl.context_label);
    for (std::size_t i = 0; i < candidate_labels.size(); ++i)
      out += " [" + std::to_string(i) + "] " + candidate_labels[i];
  }
  return out;
}

std::string worker_question(const PromptTemplate& tpl, std::string_view question,
                            std::string_view materials_block) {
  std::string out = "Question: " + std::string(question);
  if (!tpl.context_label.empty()) out += "\n" + tpl.context_label;
  out += "\n";
  out += materials_block;
  return out;
}

std::vector<Message> build_prompt(const PromptTemplate& tpl, bool few_shot, std::string user) {
  std::vector<Message> messages;
  messages.push_back(system_message(tpl.system));
  if (few_shot) messages.insert(messages.end(), tpl.few_shot.begin(), tpl.few_shot.end());
  messages.push_back(user_message(std::move(user)));
  return messages;
}

}  // namespace hopqa

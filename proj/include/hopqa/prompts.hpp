#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hopqa/message.hpp"
#include "hopqa/tags.hpp"

namespace hopqa {

enum class AgentRole { planner, worker };

// A versioned planner or worker prompt: system text plus an optional
// few-shot dialogue. Builtins are compiled in from assets/prompts.
struct PromptTemplate {
  std::string name;
  int version = 1;
  AgentRole role = AgentRole::planner;
  EnvKind env = EnvKind::text;
  std::string system;
  std::string context_label;  // "Context:", "Materials:", "Candidate:" or empty
  std::string format_reminder;
  std::vector<Message> few_shot;
};

PromptTemplate parse_prompt_template(std::string_view json_text);
PromptTemplate load_prompt_template(const std::filesystem::path& path);

const PromptTemplate& builtin_prompt(AgentRole role, EnvKind env);

struct PromptSet {
  PromptTemplate planner_text = builtin_prompt(AgentRole::planner, EnvKind::text);
  PromptTemplate worker_text = builtin_prompt(AgentRole::worker, EnvKind::text);
  PromptTemplate planner_kg = builtin_prompt(AgentRole::planner, EnvKind::kg);
  PromptTemplate worker_kg = builtin_prompt(AgentRole::worker, EnvKind::kg);

  const PromptTemplate& planner(EnvKind env) const {
    return env == EnvKind::kg ? planner_kg : planner_text;
  }
  const PromptTemplate& worker(EnvKind env) const {
    return env == EnvKind::kg ? worker_kg : worker_text;
  }
};

// "Question: q" and, for KG planners, "\nCandidate: [0] a [1] b".
std::string planner_question(const PromptTemplate& tpl, std::string_view question,
                             const std::vector<std::string>& candidate_labels);

// "Question: q\n<label>\n<materials block>".
std::string worker_question(const PromptTemplate& tpl, std::string_view question,
                            std::string_view materials_block);

// system + (few-shot dialogue) + user.
std::vector<Message> build_prompt(const PromptTemplate& tpl, bool few_shot, std::string user);

}  // namespace hopqa

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hopqa/corpus.hpp"
#include "hopqa/environment.hpp"
#include "hopqa/kg.hpp"
#include "hopqa/scripted.hpp"

namespace hopqa::testing {

std::filesystem::path data_dir();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(std::string_view name);

std::string read_file(const std::filesystem::path& p);

std::shared_ptr<const KgStore> toy_kg();
std::shared_ptr<const Environment> toy_kg_env();
std::vector<QAInstance> toy_kg_questions();
const QAInstance& toy_question(std::string_view id);
std::unique_ptr<ScriptedBackend> toy_kg_backend();
std::unique_ptr<ScriptedBackend> coin_backend();

Corpus toy_corpus();

// Rule shorthand for tests.
ScriptedRule rule(std::string pattern, std::string response, std::string scope = "",
                  MatchKind kind = MatchKind::substring);

// System-prompt substrings that tell planner and worker turns apart.
inline constexpr std::string_view kPlannerKgScope = "candidate entities";
inline constexpr std::string_view kWorkerKgScope = "Extract relevant information";
inline constexpr std::string_view kPlannerTextScope = "Answer the user's question";
inline constexpr std::string_view kWorkerTextScope = "select the most relevant";

}  // namespace hopqa::testing

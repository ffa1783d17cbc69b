#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopqa/llm.hpp"

namespace hopqa {

// exact / substring compare against the last message's content; position
// matches when the conversation holds exactly `pattern` assistant messages.
enum class MatchKind { exact, substring, position };

struct WeightedResponse {
  std::string text;
  double weight = 1.0;

  bool operator==(const WeightedResponse&) const = default;
};

struct ScriptedRule {
  MatchKind matcher = MatchKind::substring;
  std::string pattern;
  std::string scope;  // when set, the system prompt must contain it
  std::vector<WeightedResponse> responses;

  bool operator==(const ScriptedRule&) const = default;
};

void to_json(nlohmann::json& j, const ScriptedRule& rule);
void from_json(const nlohmann::json& j, ScriptedRule& rule);

// Throws InvalidInput on an empty rule set, a rule without responses, or
// weights that do not sum to 1.
void validate_rules(const std::vector<ScriptedRule>& rules);

// JSON-lines, one rule per line.
std::vector<ScriptedRule> parse_script(std::istream& in);
std::vector<ScriptedRule> load_script(const std::filesystem::path& path);

// First matching rule wins. Weighted rules draw with a generator seeded from
// (seed, messages), so the output is a pure function of the inputs.
// Throws NoRuleMatched.
std::string scripted_chat(const std::vector<ScriptedRule>& rules,
                          const std::vector<Message>& messages, std::uint64_t seed);

// Deterministic test double; never touches the network.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules);

  std::string chat(const ChatRequest& req) const override;

  std::size_t calls() const noexcept { return calls_.load(); }
  const std::vector<ScriptedRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<ScriptedRule> rules_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace hopqa

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopqa/message.hpp"

namespace hopqa {

inline constexpr double kSamplingTemperature = 0.7;
inline constexpr double kEvalTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 1024;

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = kEvalTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::optional<std::vector<std::string>> stop;
  std::optional<std::uint64_t> seed;

  bool operator==(const ChatRequest&) const = default;
};

// Throws InvalidInput unless messages are non-empty, start with a system
// message, temperature >= 0 and max_tokens >= 1.
void validate(const ChatRequest& req);

void to_json(nlohmann::json& j, const ChatRequest& req);
void from_json(const nlohmann::json& j, ChatRequest& req);

// A chat-completion backend shared by planner and worker turns. Implementations
// must be safe to call from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string chat(const ChatRequest& req) const = 0;
  // Point subsequent requests at a new endpoint (after an external training step).
  virtual void rebind(const std::string& endpoint) { (void)endpoint; }
};

}  // namespace hopqa

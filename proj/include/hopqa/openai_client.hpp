#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "hopqa/llm.hpp"

namespace hopqa {

// Exponential backoff: delay i = min(base * 2^i, max_delay), and the sum of all
// delays never exceeds total_ceiling.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
  std::chrono::milliseconds total_ceiling{20000};

  // Waits before attempts 2..max_attempts.
  std::vector<std::chrono::milliseconds> schedule() const;
};

struct OpenAiConfig {
  std::string base_url = "http://localhost:8000";
  std::string api_key_env = "OPENAI_API_KEY";
  bool require_api_key = false;
  std::chrono::milliseconds timeout{120000};
  std::size_t max_in_flight = 8;
  RetryPolicy retry;
};

// Extracts choices[0].message.content. Throws ProtocolError.
std::string parse_chat_response(std::string_view body);

// Client for POST {base_url}/v1/chat/completions. Transient failures (429,
// 5xx, transport) are retried per RetryPolicy; 401/403 and malformed bodies are not.
class OpenAiClient final : public ChatBackend {
 public:
  explicit OpenAiClient(OpenAiConfig config);

  std::string chat(const ChatRequest& req) const override;
  void rebind(const std::string& endpoint) override;

  std::string base_url() const;

 private:
  std::string attempt(const std::string& base_url, const std::string& body) const;

  OpenAiConfig config_;
  mutable std::mutex mu_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace hopqa

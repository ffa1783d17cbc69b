#include "hopqa/openai_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "hopqa/error.hpp"
#include "hopqa/http.hpp"

namespace hopqa {

std::vector<std::chrono::milliseconds> RetryPolicy::schedule() const {
  std::vector<std::chrono::milliseconds> out;
  std::chrono::milliseconds total{0};
  auto delay = base_delay;
  for (int i = 1; i < max_attempts; ++i) {
    auto d = std::min(delay, max_delay);
    d = std::min(d, total_ceiling - total);
    if (d.count() < 0) d = std::chrono::milliseconds{0};
    out.push_back(d);
    total += d;
    delay *= 2;
  }
  return out;
}

std::string parse_chat_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::ProtocolError, "message content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("malformed chat completion: ") + e.what());
  }
}

OpenAiClient::OpenAiClient(OpenAiConfig config)
    : config_(std::move(config)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight)))) {}

std::string OpenAiClient::base_url() const {
  std::lock_guard lock(mu_);
  return config_.base_url;
}

void OpenAiClient::rebind(const std::string& endpoint) {
  std::lock_guard lock(mu_);
  config_.base_url = endpoint;
}

std::string OpenAiClient::attempt(const std::string& base_url, const std::string& body) const {
  http::Headers headers;
  const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
  if (key && *key) {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  } else if (config_.require_api_key) {
    throw Error(ErrorCode::Unauthorized, "API key env var " + config_.api_key_env + " is not set");
  }

  struct Slot {
    std::counting_semaphore<>& sem;
    explicit Slot(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
  };
  const auto resp = [&] {
    Slot slot(*in_flight_);
    return http::post_json(base_url, "/v1/chat/completions", body, headers, config_.timeout);
  }();

  if (resp.status == 0) throw Error(ErrorCode::Timeout, "transport failure: " + resp.transport_error);
  if (resp.status == 401 || resp.status == 403)
    throw Error(ErrorCode::Unauthorized, "endpoint rejected credentials (HTTP " + std::to_string(resp.status) + ")");
  if (resp.status == 429) throw Error(ErrorCode::RateLimited, "rate limited (HTTP 429)");
  if (resp.status >= 500) throw Error(ErrorCode::BackendError, "server error (HTTP " + std::to_string(resp.status) + ")");
  if (resp.status < 200 || resp.status >= 300)
    throw Error(ErrorCode::ProtocolError, "unexpected HTTP " + std::to_string(resp.status));
  return parse_chat_response(resp.body);
}

std::string OpenAiClient::chat(const ChatRequest& req) const {
  validate(req);
  const std::string body = nlohmann::json(req).dump();
  const std::string url = base_url();
  const auto delays = config_.retry.schedule();
  const int attempts = std::max(1, config_.retry.max_attempts);
  for (int i = 0;; ++i) {
    try {
      return attempt(url, body);
    } catch (const Error& e) {
      if (!e.retryable() || i + 1 >= attempts) throw;
      std::this_thread::sleep_for(delays[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace hopqa

#include "hopqa/llm.hpp"

#include "hopqa/error.hpp"

namespace hopqa {

void validate(const ChatRequest& req) {
  if (req.messages.empty()) throw Error(ErrorCode::InvalidInput, "chat request has no messages");
  if (req.messages.front().role != Role::system)
    throw Error(ErrorCode::InvalidInput, "first chat message must be the system prompt");
  if (!(req.temperature >= 0.0)) throw Error(ErrorCode::InvalidInput, "temperature must be >= 0");
  if (req.max_tokens < 1) throw Error(ErrorCode::InvalidInput, "max_tokens must be >= 1");
}

void to_json(nlohmann::json& j, const ChatRequest& req) {
  j = nlohmann::json{{"model", req.model},
                     {"messages", req.messages},
                     {"temperature", req.temperature},
                     {"max_tokens", req.max_tokens}};
  if (req.stop) j["stop"] = *req.stop;
  if (req.seed) j["seed"] = *req.seed;
}

void from_json(const nlohmann::json& j, ChatRequest& req) {
  req.model = j.at("model").get<std::string>();
  req.messages = j.at("messages").get<std::vector<Message>>();
  req.temperature = j.value("temperature", kEvalTemperature);
  req.max_tokens = j.value("max_tokens", kDefaultMaxTokens);
  req.stop.reset();
  if (j.contains("stop") && !j.at("stop").is_null())
    req.stop = j.at("stop").get<std::vector<std::string>>();
  req.seed.reset();
  if (j.contains("seed") && !j.at("seed").is_null()) req.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace hopqa

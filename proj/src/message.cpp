#include "hopqa/message.hpp"

#include "hopqa/error.hpp"

namespace hopqa {

std::string_view role_name(Role r) noexcept {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw Error(ErrorCode::ParseError, "unknown message role '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const Message& m) {
  j = nlohmann::json{{"role", role_name(m.role)}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, Message& m) {
  m.role = parse_role(j.at("role").get<std::string>());
  m.content = j.at("content").get<std::string>();
}

bool roles_alternate(const std::vector<Message>& messages) noexcept {
  if (messages.empty() || messages.front().role != Role::system) return false;
  Role expected = Role::user;
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].role != expected) return false;
    expected = expected == Role::user ? Role::assistant : Role::user;
  }
  return true;
}

}  // namespace hopqa

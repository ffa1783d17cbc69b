#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hopqa {

enum class Role { system, user, assistant };

std::string_view role_name(Role r) noexcept;
Role parse_role(std::string_view name);

struct Message {
  Role role = Role::user;
  std::string content;

  bool operator==(const Message&) const = default;
};

inline Message system_message(std::string content) { return {Role::system, std::move(content)}; }
inline Message user_message(std::string content) { return {Role::user, std::move(content)}; }
inline Message assistant_message(std::string content) { return {Role::assistant, std::move(content)}; }

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

// messages[0] is system; afterwards roles alternate starting with user.
bool roles_alternate(const std::vector<Message>& messages) noexcept;

}  // namespace hopqa

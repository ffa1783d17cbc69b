#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hopqa/corpus.hpp"
#include "hopqa/kg.hpp"
#include "hopqa/retrieval.hpp"
#include "hopqa/tags.hpp"

namespace hopqa {

// One retrieved item as shown to a worker. KG materials remember the tail
// entity so the planner can traverse to it later.
struct Material {
  std::string text;
  std::optional<std::string> entity;

  bool operator==(const Material&) const = default;
};

std::string format_materials(const std::vector<Material>& items);

class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvKind kind() const noexcept = 0;

  // Materials for one subquestion, capped at kMaxMaterials. KG environments
  // require `entity`; text environments ignore it. Throws RetrievalError.
  virtual std::vector<Material> fetch(std::string_view question,
                                      const std::optional<std::string>& entity,
                                      std::size_t top_k) const = 0;

  virtual std::string entity_label(std::string_view handle) const { return std::string(handle); }
  // True when the entity can be visited (has outgoing triples).
  virtual bool traversable(std::string_view) const { return false; }
};

// Visiting an entity exposes every triple with that entity as head.
class KgEnvironment final : public Environment {
 public:
  explicit KgEnvironment(std::shared_ptr<const KgStore> store) : store_(std::move(store)) {}

  EnvKind kind() const noexcept override { return EnvKind::kg; }
  std::vector<Material> fetch(std::string_view question, const std::optional<std::string>& entity,
                              std::size_t top_k) const override;
  std::string entity_label(std::string_view handle) const override;
  bool traversable(std::string_view handle) const override;

  const KgStore& store() const noexcept { return *store_; }

 private:
  std::shared_ptr<const KgStore> store_;
};

class TextEnvironment final : public Environment {
 public:
  explicit TextEnvironment(std::shared_ptr<const Retriever> retriever)
      : retriever_(std::move(retriever)) {}

  EnvKind kind() const noexcept override { return EnvKind::text; }
  std::vector<Material> fetch(std::string_view question, const std::optional<std::string>& entity,
                              std::size_t top_k) const override;

 private:
  std::shared_ptr<const Retriever> retriever_;
};

// Chooses the environment an episode runs against.
class EnvironmentProvider {
 public:
  virtual ~EnvironmentProvider() = default;
  virtual EnvKind kind() const noexcept = 0;
  virtual std::shared_ptr<const Environment> for_question(const QAInstance& q) const = 0;
};

class SharedEnvironment final : public EnvironmentProvider {
 public:
  explicit SharedEnvironment(std::shared_ptr<const Environment> env) : env_(std::move(env)) {}
  EnvKind kind() const noexcept override { return env_->kind(); }
  std::shared_ptr<const Environment> for_question(const QAInstance&) const override { return env_; }

 private:
  std::shared_ptr<const Environment> env_;
};

// Retrieval restricted to each question's own gold passages (Hotpot-Kimi style).
class GoldContextEnvironments final : public EnvironmentProvider {
 public:
  EnvKind kind() const noexcept override { return EnvKind::text; }
  std::shared_ptr<const Environment> for_question(const QAInstance& q) const override;
};

}  // namespace hopqa

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hopqa/agent.hpp"
#include "hopqa/environment.hpp"
#include "hopqa/llm.hpp"
#include "hopqa/sampler.hpp"

namespace hopqa {

enum class EnvSource { kg, text, text_gold };
enum class RetrieverKind { bm25, embedding };
enum class BackendKind { scripted, openai };

struct EnvConfig {
  EnvSource kind = EnvSource::kg;
  std::filesystem::path dataset;
  std::filesystem::path kg;
  std::filesystem::path labels;
  std::filesystem::path corpus;
  RetrieverKind retriever = RetrieverKind::bm25;
  std::filesystem::path embedding_cache;
};

struct BackendConfig {
  BackendKind kind = BackendKind::scripted;
  std::filesystem::path script;
  std::string base_url = "http://localhost:8000";
  std::string model = "default";
  std::string api_key_env = "OPENAI_API_KEY";
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds timeout{120000};
};

struct EmbeddingConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  EnvConfig env;
  BackendConfig backend;
  EpisodeLimits limits;
  SamplerConfig sampler;
  bool few_shot = true;
  std::size_t batches = 1;  // T online iterations
  std::optional<std::string> trainer_hook;
  EmbeddingConfig embedding;

  // Checks limits, sampler and that every referenced path exists.
  void validate() const;
};

// Relative paths resolve against the config file's directory.
RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RunConfig& c);
// fnv1a64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& c);

std::unique_ptr<ChatBackend> make_backend(const RunConfig& c);
std::unique_ptr<EnvironmentProvider> make_environments(const RunConfig& c);

}  // namespace hopqa

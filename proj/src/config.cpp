#include "hopqa/config.hpp"

#include <cstdio>
#include <set>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "hopqa/embedding.hpp"
#include "hopqa/error.hpp"
#include "hopqa/kg.hpp"
#include "hopqa/openai_client.hpp"
#include "hopqa/retrieval.hpp"
#include "hopqa/scripted.hpp"
#include "hopqa/seed.hpp"

namespace hopqa {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : t)
    if (!allowed.contains(std::string(key.str())))
      config_error("unknown key '" + std::string(key.str()) + "' in " + where);
}

const toml::table* section(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (node == nullptr) return nullptr;
  const auto* t = node->as_table();
  if (t == nullptr) config_error(std::string("[") + name + "] must be a table");
  return t;
}

template <typename T>
void read(const toml::table* t, const char* key, T& out) {
  if (t == nullptr) return;
  const auto* node = t->get(key);
  if (node == nullptr) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value<bool>()) return void(out = *v);
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node->value<std::int64_t>()) {
      if (*v < 0) config_error(std::string(key) + " must be non-negative");
      return void(out = static_cast<T>(*v));
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (auto v = node->value<double>()) return void(out = *v);
  } else {
    if (auto v = node->value<std::string>()) return void(out = *v);
  }
  config_error(std::string("wrong type for '") + key + "'");
}

void read_path(const toml::table* t, const char* key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  std::string s;
  read(t, key, s);
  if (s.empty()) return;
  std::filesystem::path p(s);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) config_error(std::string(what) + " path is required");
  if (!std::filesystem::exists(p)) config_error(std::string(what) + " not found: " + p.string());
}

}  // namespace

void RunConfig::validate() const {
  limits.validate();
  sampler.validate();
  if (batches < 1) config_error("sampler.batches must be >= 1");
  require_file(env.dataset, "dataset");
  switch (env.kind) {
    case EnvSource::kg:
      require_file(env.kg, "kg");
      if (!env.labels.empty()) require_file(env.labels, "labels");
      break;
    case EnvSource::text:
      require_file(env.corpus, "corpus");
      if (env.retriever == RetrieverKind::embedding && env.embedding_cache.empty() &&
          embedding.base_url.empty())
        config_error("embedding retriever needs embedding_cache or [embedding].base_url");
      break;
    case EnvSource::text_gold:
      break;
  }
  if (backend.kind == BackendKind::scripted) require_file(backend.script, "backend.script");
  if (backend.max_in_flight < 1) config_error("backend.max_in_flight must be >= 1");
}

RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    config_error(std::string("TOML: ") + std::string(e.description()));
  }
  check_keys(root, "top level",
             {"seed", "out_dir", "env", "backend", "limits", "sampler", "embedding"});

  RunConfig c;
  const toml::table* top = &root;
  read(top, "seed", c.seed);
  read_path(top, "out_dir", base_dir, c.out_dir);

  if (const auto* env = section(root, "env")) {
    check_keys(*env, "[env]", {"kind", "dataset", "kg", "labels", "corpus", "retriever", "embedding_cache"});
    std::string kind = "kg";
    read(env, "kind", kind);
    if (kind == "kg") c.env.kind = EnvSource::kg;
    else if (kind == "text") c.env.kind = EnvSource::text;
    else if (kind == "text-gold") c.env.kind = EnvSource::text_gold;
    else config_error("env.kind must be kg, text or text-gold");
    std::string retriever = "bm25";
    read(env, "retriever", retriever);
    if (retriever == "bm25") c.env.retriever = RetrieverKind::bm25;
    else if (retriever == "embedding") c.env.retriever = RetrieverKind::embedding;
    else config_error("env.retriever must be bm25 or embedding");
    read_path(env, "dataset", base_dir, c.env.dataset);
    read_path(env, "kg", base_dir, c.env.kg);
    read_path(env, "labels", base_dir, c.env.labels);
    read_path(env, "corpus", base_dir, c.env.corpus);
    read_path(env, "embedding_cache", base_dir, c.env.embedding_cache);
  }

  if (const auto* b = section(root, "backend")) {
    check_keys(*b, "[backend]", {"kind", "script", "base_url", "model", "api_key_env", "max_in_flight", "timeout_ms"});
    std::string kind = "scripted";
    read(b, "kind", kind);
    if (kind == "scripted") c.backend.kind = BackendKind::scripted;
    else if (kind == "openai") c.backend.kind = BackendKind::openai;
    else config_error("backend.kind must be scripted or openai");
    read_path(b, "script", base_dir, c.backend.script);
    read(b, "base_url", c.backend.base_url);
    read(b, "model", c.backend.model);
    read(b, "api_key_env", c.backend.api_key_env);
    read(b, "max_in_flight", c.backend.max_in_flight);
    std::int64_t timeout = c.backend.timeout.count();
    read(b, "timeout_ms", timeout);
    c.backend.timeout = std::chrono::milliseconds(timeout);
  }

  if (const auto* l = section(root, "limits")) {
    check_keys(*l, "[limits]", {"max_iterations", "top_k", "max_searches_per_turn"});
    read(l, "max_iterations", c.limits.max_iterations);
    read(l, "top_k", c.limits.top_k);
    read(l, "max_searches_per_turn", c.limits.max_searches_per_turn);
  }

  if (const auto* s = section(root, "sampler")) {
    check_keys(*s, "[sampler]", {"m", "max_attempts", "batch_size", "k_init", "temperature", "r_sup",
                                 "dedupe", "concurrency", "few_shot", "batches", "trainer_hook"});
    read(s, "m", c.sampler.m);
    read(s, "max_attempts", c.sampler.max_attempts);
    read(s, "batch_size", c.sampler.batch_size);
    read(s, "k_init", c.sampler.k_init);
    read(s, "temperature", c.sampler.temperature);
    read(s, "r_sup", c.sampler.r_sup);
    read(s, "dedupe", c.sampler.dedupe);
    read(s, "concurrency", c.sampler.concurrency);
    read(s, "few_shot", c.few_shot);
    read(s, "batches", c.batches);
    std::string hook;
    read(s, "trainer_hook", hook);
    if (!hook.empty()) c.trainer_hook = hook;
  }

  if (const auto* e = section(root, "embedding")) {
    check_keys(*e, "[embedding]", {"base_url", "model", "api_key_env"});
    read(e, "base_url", c.embedding.base_url);
    read(e, "model", c.embedding.model);
    read(e, "api_key_env", c.embedding.api_key_env);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (f == nullptr) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::string text;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);
  return parse_run_config(text, path.parent_path());
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  static constexpr const char* kEnv[] = {"kg", "text", "text-gold"};
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["env"] = {{"kind", kEnv[static_cast<int>(c.env.kind)]},
              {"dataset", c.env.dataset.filename().string()},
              {"kg", c.env.kg.filename().string()},
              {"labels", c.env.labels.filename().string()},
              {"corpus", c.env.corpus.filename().string()},
              {"retriever", c.env.retriever == RetrieverKind::bm25 ? "bm25" : "embedding"}};
  j["backend"] = {{"kind", c.backend.kind == BackendKind::scripted ? "scripted" : "openai"},
                  {"script", c.backend.script.filename().string()},
                  {"model", c.backend.model}};
  j["limits"] = {{"max_iterations", c.limits.max_iterations},
                 {"top_k", c.limits.top_k},
                 {"max_searches_per_turn", c.limits.max_searches_per_turn}};
  j["sampler"] = {{"m", c.sampler.m},
                  {"max_attempts", c.sampler.max_attempts},
                  {"batch_size", c.sampler.batch_size},
                  {"k_init", c.sampler.k_init},
                  {"temperature", c.sampler.temperature},
                  {"r_sup", c.sampler.r_sup},
                  {"dedupe", c.sampler.dedupe},
                  {"few_shot", c.few_shot},
                  {"batches", c.batches}};
  return j;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

std::unique_ptr<ChatBackend> make_backend(const RunConfig& c) {
  if (c.backend.kind == BackendKind::scripted)
    return std::make_unique<ScriptedBackend>(load_script(c.backend.script));
  OpenAiConfig oc;
  oc.base_url = c.backend.base_url;
  oc.api_key_env = c.backend.api_key_env;
  oc.timeout = c.backend.timeout;
  oc.max_in_flight = c.backend.max_in_flight;
  return std::make_unique<OpenAiClient>(oc);
}

std::unique_ptr<EnvironmentProvider> make_environments(const RunConfig& c) {
  switch (c.env.kind) {
    case EnvSource::kg: {
      auto store = std::make_shared<const KgStore>(load_kg(c.env.kg, c.env.labels));
      return std::make_unique<SharedEnvironment>(std::make_shared<const KgEnvironment>(store));
    }
    case EnvSource::text: {
      auto corpus = load_corpus(c.env.corpus);
      std::shared_ptr<const Retriever> retriever;
      if (c.env.retriever == RetrieverKind::bm25) {
        retriever = std::make_shared<const Bm25Index>(std::move(corpus));
      } else {
        std::shared_ptr<const Embedder> embedder;
        if (!c.embedding.base_url.empty())
          embedder = std::make_shared<const HttpEmbedder>(
              EmbeddingServiceConfig{c.embedding.base_url, c.embedding.model, c.embedding.api_key_env});
        if (!c.env.embedding_cache.empty() && std::filesystem::exists(c.env.embedding_cache)) {
          auto vectors = load_embedding_cache(c.env.embedding_cache, corpus);
          retriever = std::make_shared<const EmbeddingIndex>(std::move(corpus), std::move(vectors), embedder);
        } else {
          if (!embedder) config_error("embedding retriever has neither a cache nor a service");
          retriever = std::make_shared<const EmbeddingIndex>(EmbeddingIndex::build(std::move(corpus), embedder));
        }
      }
      return std::make_unique<SharedEnvironment>(std::make_shared<const TextEnvironment>(retriever));
    }
    case EnvSource::text_gold:
      return std::make_unique<GoldContextEnvironments>();
  }
  config_error("unsupported environment");
}

}  // namespace hopqa

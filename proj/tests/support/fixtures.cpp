#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace hopqa::testing {

std::filesystem::path data_dir() { return HOPQA_TEST_DATA; }

std::filesystem::path scratch_dir(std::string_view name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("hopqa-" + std::string(name) + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::shared_ptr<const KgStore> toy_kg() {
  static const auto store =
      std::make_shared<const KgStore>(load_kg(data_dir() / "kg.tsv", data_dir() / "labels.tsv"));
  return store;
}

std::shared_ptr<const Environment> toy_kg_env() {
  return std::make_shared<const KgEnvironment>(toy_kg());
}

std::vector<QAInstance> toy_kg_questions() { return load_dataset(data_dir() / "kg_questions.json"); }

const QAInstance& toy_question(std::string_view id) {
  static const auto qs = toy_kg_questions();
  for (const auto& q : qs)
    if (q.id == id) return q;
  throw std::runtime_error("no toy question " + std::string(id));
}

std::unique_ptr<ScriptedBackend> toy_kg_backend() {
  return std::make_unique<ScriptedBackend>(load_script(data_dir() / "kg_script.jsonl"));
}

std::unique_ptr<ScriptedBackend> coin_backend() {
  return std::make_unique<ScriptedBackend>(load_script(data_dir() / "coin_script.jsonl"));
}

Corpus toy_corpus() { return load_corpus(data_dir() / "corpus.jsonl"); }

ScriptedRule rule(std::string pattern, std::string response, std::string scope, MatchKind kind) {
  ScriptedRule r;
  r.matcher = kind;
  r.pattern = std::move(pattern);
  r.scope = std::move(scope);
  r.responses = {{std::move(response), 1.0}};
  return r;
}

}  // namespace hopqa::testing

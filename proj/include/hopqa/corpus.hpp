#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace hopqa {

struct Passage {
  std::string id;
  std::string title;
  std::string body;

  bool operator==(const Passage&) const = default;
};

// Passages with unique ids and non-empty bodies.
class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateId or InvalidInput.
  explicit Corpus(std::vector<Passage> passages);

  const std::vector<Passage>& passages() const noexcept { return passages_; }
  std::size_t size() const noexcept { return passages_.size(); }
  bool empty() const noexcept { return passages_.empty(); }
  const Passage& operator[](std::size_t i) const { return passages_[i]; }

 private:
  std::vector<Passage> passages_;
};

// JSON-lines, one {"id", "title", "text"} object per line.
Corpus parse_corpus_jsonl(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

struct QAInstance {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;    // primary answer first, then aliases
  std::vector<std::string> topic_entities;  // KG handles
  std::vector<Passage> context;             // per-question passages, when the dataset ships them

  const std::string& answer() const { return gold_answers.front(); }
};

// JSON array of {"_id", "question", "answer", "answer_aliases"?, "topic_entities"?,
// "context"?}. `context` uses the HotpotQA [[title, [sentences...]], ...] shape.
std::vector<QAInstance> parse_dataset(std::istream& in);
std::vector<QAInstance> load_dataset(const std::filesystem::path& path);

}  // namespace hopqa

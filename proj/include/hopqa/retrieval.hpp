#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hopqa/corpus.hpp"

namespace hopqa {

inline constexpr std::size_t kMaxMaterials = 64;

struct Hit {
  std::size_t passage = 0;  // index into the corpus
  double score = 0.0;
};

class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual const Corpus& corpus() const noexcept = 0;
  // Best k hits by descending score, ties by ascending passage id.
  virtual std::vector<Hit> search(std::string_view query, std::size_t k) const = 0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Lexical inverted index over title + body. Immutable after construction.
class Bm25Index final : public Retriever {
 public:
  // Throws EmptyCorpus.
  explicit Bm25Index(Corpus corpus, Bm25Params params = {});

  const Corpus& corpus() const noexcept override { return corpus_; }
  std::vector<Hit> search(std::string_view query, std::size_t k) const override;

  // Sum over query tokens (repeats included) of idf * saturated tf.
  double score(std::string_view query, std::size_t passage) const;
  double idf(const std::string& term) const;

  std::size_t vocabulary_size() const noexcept { return postings_.size(); }
  double average_length() const noexcept { return avg_len_; }
  const Bm25Params& params() const noexcept { return params_; }

 private:
  struct Posting {
    std::size_t passage;
    std::size_t tf;
  };
  double term_weight(double idf, std::size_t tf, std::size_t passage) const;

  Corpus corpus_;
  Bm25Params params_;
  std::vector<std::size_t> lengths_;
  double avg_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

// Orders hits by descending score then ascending passage id, keeps k.
void rank_hits(std::vector<Hit>& hits, const Corpus& corpus, std::size_t k);

// "[i] item" lines, zero-based, newline-separated. At most kMaxMaterials items.
std::string format_materials(const std::vector<std::string>& items);

}  // namespace hopqa

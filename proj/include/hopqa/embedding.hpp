#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hopqa/corpus.hpp"
#include "hopqa/retrieval.hpp"

namespace hopqa {

using Vector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) const = 0;
};

struct EmbeddingServiceConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env;  // empty: no auth header
  std::chrono::milliseconds timeout{30000};
};

// POST {base_url}/v1/embeddings with {"input": [...], "model": name}; reads
// {"data": [{"embedding": [...]}, ...]}. Throws ServiceUnavailable or ProtocolError.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(EmbeddingServiceConfig config) : config_(std::move(config)) {}
  std::vector<Vector> embed(const std::vector<std::string>& texts) const override;

 private:
  EmbeddingServiceConfig config_;
};

// Throws InvalidInput for zero or non-finite vectors.
Vector unit_normalize(Vector v);
// Cosine of two vectors of equal dimension. Throws DimensionMismatch.
double cosine(const Vector& a, const Vector& b);

// Dense retriever over cached, unit-normalized passage embeddings.
class EmbeddingIndex final : public Retriever {
 public:
  // Throws EmptyCorpus, DimensionMismatch (ragged or misaligned vectors).
  EmbeddingIndex(Corpus corpus, std::vector<Vector> passage_vectors,
                 std::shared_ptr<const Embedder> embedder);

  static EmbeddingIndex build(Corpus corpus, std::shared_ptr<const Embedder> embedder,
                              std::size_t batch_size = 32);

  const Corpus& corpus() const noexcept override { return corpus_; }
  std::vector<Hit> search(std::string_view query, std::size_t k) const override;
  std::vector<Hit> search_vector(const Vector& query, std::size_t k) const;

  std::size_t dimension() const noexcept { return dim_; }
  const std::vector<Vector>& vectors() const noexcept { return vectors_; }

 private:
  Corpus corpus_;
  std::vector<Vector> vectors_;
  std::size_t dim_ = 0;
  std::shared_ptr<const Embedder> embedder_;
};

inline std::vector<Hit> embed_retrieve(const EmbeddingIndex& index, std::string_view query,
                                       std::size_t k) {
  return index.search(query, k);
}

// JSON-lines {"id", "embedding"} aligned with the corpus.
void save_embedding_cache(const std::filesystem::path& path, const Corpus& corpus,
                          const std::vector<Vector>& vectors);
std::vector<Vector> load_embedding_cache(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace hopqa

#include "hopqa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hopqa/error.hpp"
#include "hopqa/http.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

std::vector<Vector> HttpEmbedder::embed(const std::vector<std::string>& texts) const {
  const nlohmann::json request = {{"input", texts}, {"model", config_.model}};
  http::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
      headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  const auto resp =
      http::post_json(config_.base_url, "/v1/embeddings", request.dump(), headers, config_.timeout);
  if (resp.status == 0)
    throw Error(ErrorCode::ServiceUnavailable, "embedding service unreachable: " + resp.transport_error);
  if (resp.status < 200 || resp.status >= 300)
    throw Error(ErrorCode::ServiceUnavailable,
                "embedding service returned HTTP " + std::to_string(resp.status));
  try {
    const auto j = nlohmann::json::parse(resp.body);
    std::vector<Vector> out;
    for (const auto& item : j.at("data")) out.push_back(item.at("embedding").get<Vector>());
    if (out.size() != texts.size())
      throw Error(ErrorCode::ProtocolError, "embedding service returned " + std::to_string(out.size()) +
                                                " vectors for " + std::to_string(texts.size()) + " inputs");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("malformed embedding response: ") + e.what());
  }
}

Vector unit_normalize(Vector v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::InvalidInput, "cannot normalize a zero or non-finite vector");
  for (double& x : v) x /= norm;
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ: " + std::to_string(a.size()) +
                                                  " vs " + std::to_string(b.size()));
  const auto ua = unit_normalize(a);
  const auto ub = unit_normalize(b);
  double dot = 0.0;
  for (std::size_t i = 0; i < ua.size(); ++i) dot += ua[i] * ub[i];
  return std::clamp(dot, -1.0, 1.0);
}

EmbeddingIndex::EmbeddingIndex(Corpus corpus, std::vector<Vector> passage_vectors,
                               std::shared_ptr<const Embedder> embedder)
    : corpus_(std::move(corpus)), embedder_(std::move(embedder)) {
  if (corpus_.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  if (passage_vectors.size() != corpus_.size())
    throw Error(ErrorCode::DimensionMismatch, "expected one embedding per passage");
  dim_ = passage_vectors.front().size();
  vectors_.reserve(passage_vectors.size());
  for (auto& v : passage_vectors) {
    if (v.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "ragged passage embeddings");
    vectors_.push_back(unit_normalize(std::move(v)));
  }
}

EmbeddingIndex EmbeddingIndex::build(Corpus corpus, std::shared_ptr<const Embedder> embedder,
                                     std::size_t batch_size) {
  std::vector<Vector> vectors;
  std::vector<std::string> batch;
  auto flush = [&] {
    if (batch.empty()) return;
    auto part = embedder->embed(batch);
    vectors.insert(vectors.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    batch.clear();
  };
  for (const auto& p : corpus.passages()) {
    batch.push_back(p.title.empty() ? p.body : p.title + "\n" + p.body);
    if (batch.size() >= batch_size) flush();
  }
  flush();
  return EmbeddingIndex(std::move(corpus), std::move(vectors), std::move(embedder));
}

std::vector<Hit> EmbeddingIndex::search_vector(const Vector& query, std::size_t k) const {
  if (query.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                  " does not match index dimension " + std::to_string(dim_));
  const auto q = unit_normalize(query);
  std::vector<Hit> hits;
  hits.reserve(vectors_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += q[d] * vectors_[i][d];
    hits.push_back({i, std::clamp(dot, -1.0, 1.0)});
  }
  rank_hits(hits, corpus_, k);
  return hits;
}

std::vector<Hit> EmbeddingIndex::search(std::string_view query, std::size_t k) const {
  if (!embedder_) throw Error(ErrorCode::ServiceUnavailable, "no embedding service configured");
  auto vecs = embedder_->embed({std::string(query)});
  if (vecs.size() != 1) throw Error(ErrorCode::ProtocolError, "expected one query embedding");
  return search_vector(vecs.front(), k);
}

void save_embedding_cache(const std::filesystem::path& path, const Corpus& corpus,
                          const std::vector<Vector>& vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write embedding cache " + path.string());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out << nlohmann::json{{"id", corpus[i].id}, {"embedding", vectors.at(i)}}.dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<Vector> load_embedding_cache(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open embedding cache " + path.string());
  std::unordered_map<std::string, Vector> by_id;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      by_id[j.at("id").get<std::string>()] = j.at("embedding").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("embedding cache: ") + e.what());
    }
  }
  std::vector<Vector> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus.passages()) {
    auto it = by_id.find(p.id);
    if (it == by_id.end())
      throw Error(ErrorCode::DimensionMismatch, "embedding cache lacks passage '" + p.id + "'");
    out.push_back(std::move(it->second));
  }
  return out;
}

}  // namespace hopqa

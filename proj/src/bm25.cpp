#include "hopqa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hopqa/error.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

Bm25Index::Bm25Index(Corpus corpus, Bm25Params params)
    : corpus_(std::move(corpus)), params_(params) {
  if (corpus_.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  lengths_.reserve(corpus_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    const auto& p = corpus_[i];
    auto tokens = text::word_tokens(p.title + " " + p.body);
    std::map<std::string, std::size_t> tf;
    for (auto& t : tokens) ++tf[t];
    for (auto& [term, count] : tf) postings_[term].push_back({i, count});
    lengths_.push_back(tokens.size());
    total += static_cast<double>(tokens.size());
  }
  avg_len_ = total / static_cast<double>(corpus_.size());
}

double Bm25Index::idf(const std::string& term) const {
  auto it = postings_.find(term);
  const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double n = static_cast<double>(corpus_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_weight(double idf, std::size_t tf, std::size_t passage) const {
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - params_.b + params_.b * static_cast<double>(lengths_[passage]) /
                                            (avg_len_ > 0.0 ? avg_len_ : 1.0);
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

double Bm25Index::score(std::string_view query, std::size_t passage) const {
  double s = 0.0;
  for (const auto& term : text::word_tokens(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    for (const auto& posting : it->second) {
      if (posting.passage == passage) {
        s += term_weight(idf(term), posting.tf, passage);
        break;
      }
    }
  }
  return s;
}

std::vector<Hit> Bm25Index::search(std::string_view query, std::size_t k) const {
  std::vector<double> scores(corpus_.size(), 0.0);
  for (const auto& term : text::word_tokens(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& posting : it->second)
      scores[posting.passage] += term_weight(w, posting.tf, posting.passage);
  }
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > 0.0) hits.push_back({i, scores[i]});
  rank_hits(hits, corpus_, k);
  return hits;
}

void rank_hits(std::vector<Hit>& hits, const Corpus& corpus, std::size_t k) {
  auto better = [&](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return corpus[a.passage].id < corpus[b.passage].id;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
}

std::string format_materials(const std::vector<std::string>& items) {
  if (items.size() > kMaxMaterials)
    throw Error(ErrorCode::InvalidInput, "at most " + std::to_string(kMaxMaterials) +
                                             " materials per worker call, got " +
                                             std::to_string(items.size()));
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += "[" + std::to_string(i) + "] " + items[i];
  }
  return out;
}

}  // namespace hopqa

#include "hopqa/environment.hpp"

#include "hopqa/error.hpp"

namespace hopqa {

std::string format_materials(const std::vector<Material>& items) {
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const auto& m : items) texts.push_back(m.text);
  return format_materials(texts);
}

std::vector<Material> KgEnvironment::fetch(std::string_view, const std::optional<std::string>& entity,
                                           std::size_t) const {
  if (!entity) throw Error(ErrorCode::RetrievalError, "KG search needs a candidate entity");
  std::vector<Material> out;
  for (const auto& t : store_->neighbors(*entity)) {
    if (out.size() == kMaxMaterials) break;
    out.push_back({store_->format(t), t.tail});
  }
  return out;
}

std::string KgEnvironment::entity_label(std::string_view handle) const {
  return store_->label(handle);
}

bool KgEnvironment::traversable(std::string_view handle) const {
  return store_->has_outgoing(handle);
}

std::vector<Material> TextEnvironment::fetch(std::string_view question,
                                             const std::optional<std::string>&,
                                             std::size_t top_k) const {
  std::vector<Material> out;
  const auto k = std::min(top_k, kMaxMaterials);
  for (const auto& hit : retriever_->search(question, k))
    out.push_back({retriever_->corpus()[hit.passage].body, std::nullopt});
  return out;
}

std::shared_ptr<const Environment> GoldContextEnvironments::for_question(const QAInstance& q) const {
  if (q.context.empty())
    throw Error(ErrorCode::RetrievalError, "question '" + q.id + "' ships no gold passages");
  auto index = std::make_shared<const Bm25Index>(Corpus(q.context));
  return std::make_shared<const TextEnvironment>(std::move(index));
}

}  // namespace hopqa

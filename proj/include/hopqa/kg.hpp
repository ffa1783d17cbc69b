#pragma once

#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hopqa {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

// Triple store keyed by entity handle. Every handle seen in a triple has a
// display label (the handle itself unless a labels file overrides it).
class KgStore {
 public:
  // Returns false when the triple was already present.
  bool add(Triple t);
  void set_label(const std::string& handle, std::string label);

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t entity_count() const noexcept { return labels_.size(); }

  bool contains(std::string_view handle) const;
  bool has_outgoing(std::string_view handle) const;

  // Throws UnknownEntity.
  const std::string& label(std::string_view handle) const;

  // "head, relation, tail" using display labels.
  std::string format(const Triple& t) const;

  // All triples whose head is `handle`, in insertion order. Throws UnknownEntity.
  std::vector<Triple> neighbors(std::string_view handle) const;

 private:
  std::vector<Triple> triples_;
  std::set<Triple> seen_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_head_;
  std::unordered_map<std::string, std::string> labels_;
};

inline std::vector<Triple> kg_neighbors(const KgStore& store, std::string_view entity) {
  return store.neighbors(entity);
}

// Three tab-separated columns head/relation/tail per line; blank lines skipped.
KgStore parse_kg_tsv(std::istream& in);
void parse_kg_labels(std::istream& in, KgStore& store);
KgStore load_kg(const std::filesystem::path& triples,
                const std::filesystem::path& labels = {});

}  // namespace hopqa

#include "hopqa/kg.hpp"

#include <fstream>

#include "hopqa/error.hpp"

namespace hopqa {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!cols.empty() && !cols.back().empty() && cols.back().back() == '\r') cols.back().pop_back();
  return cols;
}

}  // namespace

bool KgStore::add(Triple t) {
  if (!seen_.insert(t).second) return false;
  labels_.try_emplace(t.head, t.head);
  labels_.try_emplace(t.tail, t.tail);
  by_head_[t.head].push_back(triples_.size());
  triples_.push_back(std::move(t));
  return true;
}

void KgStore::set_label(const std::string& handle, std::string label) {
  labels_[handle] = std::move(label);
}

bool KgStore::contains(std::string_view handle) const {
  return labels_.find(std::string(handle)) != labels_.end();
}

bool KgStore::has_outgoing(std::string_view handle) const {
  return by_head_.find(std::string(handle)) != by_head_.end();
}

const std::string& KgStore::label(std::string_view handle) const {
  auto it = labels_.find(std::string(handle));
  if (it == labels_.end())
    throw Error(ErrorCode::UnknownEntity, "unknown entity '" + std::string(handle) + "'");
  return it->second;
}

std::string KgStore::format(const Triple& t) const {
  return label(t.head) + ", " + t.relation + ", " + label(t.tail);
}

std::vector<Triple> KgStore::neighbors(std::string_view handle) const {
  if (!contains(handle))
    throw Error(ErrorCode::UnknownEntity, "unknown entity '" + std::string(handle) + "'");
  std::vector<Triple> out;
  auto it = by_head_.find(std::string(handle));
  if (it == by_head_.end()) return out;
  out.reserve(it->second.size());
  for (auto i : it->second) out.push_back(triples_[i]);
  return out;
}

KgStore parse_kg_tsv(std::istream& in) {
  KgStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() || cols[2].empty())
      throw Error(ErrorCode::ParseError,
                  "KG line " + std::to_string(lineno) + ": expected head<TAB>relation<TAB>tail");
    store.add({std::move(cols[0]), std::move(cols[1]), std::move(cols[2])});
  }
  return store;
}

void parse_kg_labels(std::istream& in, KgStore& store) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty())
      throw Error(ErrorCode::ParseError,
                  "labels line " + std::to_string(lineno) + ": expected handle<TAB>label");
    store.set_label(cols[0], std::move(cols[1]));
  }
}

KgStore load_kg(const std::filesystem::path& triples, const std::filesystem::path& labels) {
  std::ifstream in(triples);
  if (!in) throw Error(ErrorCode::IoError, "cannot open KG file " + triples.string());
  auto store = parse_kg_tsv(in);
  if (!labels.empty()) {
    std::ifstream lin(labels);
    if (!lin) throw Error(ErrorCode::IoError, "cannot open labels file " + labels.string());
    parse_kg_labels(lin, store);
  }
  return store;
}

}  // namespace hopqa

#include "hopqa/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hopqa/error.hpp"
#include "hopqa/text.hpp"

namespace hopqa {

Corpus::Corpus(std::vector<Passage> passages) : passages_(std::move(passages)) {
  std::unordered_set<std::string> ids;
  for (const auto& p : passages_) {
    if (!ids.insert(p.id).second) throw Error(ErrorCode::DuplicateId, "duplicate passage id '" + p.id + "'");
    if (text::trim(p.body).empty())
      throw Error(ErrorCode::InvalidInput, "passage '" + p.id + "' has an empty body");
  }
}

Corpus parse_corpus_jsonl(std::istream& in) {
  std::vector<Passage> passages;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Passage p;
      p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      p.title = j.value("title", "");
      p.body = j.at("text").get<std::string>();
      passages.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "corpus line " + std::to_string(lineno) + ": " + std::string(e.what()));
    }
  }
  return Corpus(std::move(passages));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  return parse_corpus_jsonl(in);
}

namespace {

std::vector<Passage> parse_context(const nlohmann::json& ctx, const std::string& qid) {
  std::vector<Passage> out;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const auto& entry = ctx[i];
    Passage p;
    p.id = qid + "#" + std::to_string(i);
    p.title = entry.at(0).get<std::string>();
    const auto& sents = entry.at(1);
    if (sents.is_string()) {
      p.body = sents.get<std::string>();
    } else {
      for (const auto& s : sents) p.body += s.get<std::string>();
    }
    p.body = std::string(text::trim(p.body));
    if (!p.body.empty()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<QAInstance> parse_dataset(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("dataset: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "dataset must be a JSON array");
  std::vector<QAInstance> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& j = doc[i];
    try {
      QAInstance q;
      q.id = j.at("_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.gold_answers.push_back(j.at("answer").get<std::string>());
      if (j.contains("answer_aliases"))
        for (const auto& a : j.at("answer_aliases")) q.gold_answers.push_back(a.get<std::string>());
      if (j.contains("topic_entities"))
        q.topic_entities = j.at("topic_entities").get<std::vector<std::string>>();
      if (j.contains("context")) q.context = parse_context(j.at("context"), q.id);
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "dataset entry " + std::to_string(i) + ": " + std::string(e.what()));
    }
  }
  return out;
}

std::vector<QAInstance> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset " + path.string());
  return parse_dataset(in);
}

}  // namespace hopqa

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "hopqa/embedding.hpp"
#include "hopqa/error.hpp"
#include "hopqa/retrieval.hpp"
#include "hopqa/text.hpp"
#include "oracles.hpp"
#include "stub_server.hpp"

using namespace hopqa;

namespace {

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidInput;
}

Corpus micro_corpus() {
  return Corpus({{"d0", "", "the cat sat"}, {"d1", "", "the dog sat on the mat"}, {"d2", "", "cat cat dog"}});
}

std::vector<std::vector<std::string>> micro_tokens() {
  return {{"the", "cat", "sat"}, {"the", "dog", "sat", "on", "the", "mat"}, {"cat", "cat", "dog"}};
}

}  // namespace

TEST_CASE("KG neighbors of Xawery Żuławski") {
  const auto kg = testing::toy_kg();
  const auto n = kg_neighbors(*kg, "xawery_zulawski");
  REQUIRE(n.size() == 8);
  CHECK(kg->format(n[0]) == "Xawery Żuławski, mother, Małgorzata Braunek");
  CHECK(kg->format(n[7]) == "Xawery Żuławski, place of birth, Warsaw");
  CHECK(kg_neighbors(*kg, "warsaw").empty());
  CHECK(error_of([&] { kg_neighbors(*kg, "nobody"); }) == ErrorCode::UnknownEntity);
}

TEST_CASE("KG neighbors equal a brute-force head filter") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    KgStore store;
    std::vector<Triple> all;
    for (int i = 0; i < 30; ++i) {
      Triple t{"e" + std::to_string(rng() % 5), "r" + std::to_string(rng() % 3), "e" + std::to_string(rng() % 5)};
      if (store.add(t)) all.push_back(t);
    }
    for (int e = 0; e < 5; ++e) {
      const auto h = "e" + std::to_string(e);
      if (!store.contains(h)) continue;
      std::vector<Triple> expect;
      std::copy_if(all.begin(), all.end(), std::back_inserter(expect), [&](const Triple& t) { return t.head == h; });
      CHECK(store.neighbors(h) == expect);
    }
  }
}

TEST_CASE("KG store deduplicates and parses TSV") {
  std::istringstream tsv("a\tr\tb\na\tr\tb\nb\ts\tc\n");
  auto store = parse_kg_tsv(tsv);
  CHECK(store.triples().size() == 2);
  std::istringstream bad("a\tr\n");
  CHECK(error_of([&] { parse_kg_tsv(bad); }) == ErrorCode::ParseError);
}

TEST_CASE("KG environment exposes every head triple as materials") {
  const auto env = testing::toy_kg_env();
  const auto m = env->fetch("anything", std::string("xawery_zulawski"), 1);
  REQUIRE(m.size() == 8);
  CHECK(m[0].entity == "malgorzata_braunek");
  CHECK(env->traversable("malgorzata_braunek"));
  CHECK_FALSE(env->traversable("warsaw"));
  CHECK(error_of([&] { env->fetch("q", std::nullopt, 5); }) == ErrorCode::RetrievalError);
}

TEST_CASE("corpus validation") {
  CHECK(error_of([] { Corpus({{"a", "", "x"}, {"a", "", "y"}}); }) == ErrorCode::DuplicateId);
  CHECK(error_of([] { Corpus({{"a", "", "  "}}); }) == ErrorCode::InvalidInput);
  CHECK(error_of([] { Bm25Index(Corpus{}); }) == ErrorCode::EmptyCorpus);
  CHECK(testing::toy_corpus().size() == 10);
}

TEST_CASE("BM25 matches hand-computed scores") {
  Bm25Index idx(micro_corpus());
  const double expect_cat[] = {0.523548346501579, 0.0, 0.6951314180441133};
  const double expect_cat_dog[] = {0.523548346501579, 0.39019169220400696, 1.2186797645456924};
  const double expect_the_mat[] = {0.523548346501579, 1.380853059569857, 0.0};
  const double expect_cat_cat[] = {1.047096693003158, 0.0, 1.3902628360882265};
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(std::abs(idx.score("cat", d) - expect_cat[d]) < 1e-9);
    CHECK(std::abs(idx.score("cat dog", d) - expect_cat_dog[d]) < 1e-9);
    CHECK(std::abs(idx.score("The mat", d) - expect_the_mat[d]) < 1e-9);
    CHECK(std::abs(idx.score("cat cat", d) - expect_cat_cat[d]) < 1e-9);
  }
}

TEST_CASE("BM25 agrees with the reference formula on the toy corpus") {
  const auto corpus = testing::toy_corpus();
  Bm25Index idx(corpus);
  std::vector<std::vector<std::string>> docs;
  for (const auto& p : corpus.passages()) docs.push_back(text::word_tokens(p.title + " " + p.body));
  for (const char* q : {"What college did Kyeon Mi-ri attend?", "film 2003", "University of Seoul"}) {
    const auto qt = text::word_tokens(q);
    for (std::size_t d = 0; d < docs.size(); ++d)
      CHECK(idx.score(q, d) == doctest::Approx(testing::bm25_reference(docs, d, qt)).epsilon(1e-12));
  }
}

TEST_CASE("BM25 ranking") {
  const auto corpus = testing::toy_corpus();
  Bm25Index idx(corpus);
  auto hits = idx.search("What college did Kyeon Mi-ri attend?", 5);
  REQUIRE_FALSE(hits.empty());
  CHECK(corpus[hits[0].passage].title == "Kyeon Mi-ri");
  CHECK(idx.search("zebra quantum", 5).empty());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    hits = idx.search(corpus[i].body, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].passage == i);
  }
}

TEST_CASE("BM25 ties break by passage id and top-k nests") {
  Bm25Index idx(Corpus({{"b", "", "same words"}, {"a", "", "same words"}, {"c", "", "other"}}));
  const auto hits = idx.search("same", 2);
  REQUIRE(hits.size() == 2);
  CHECK(idx.corpus()[hits[0].passage].id == "a");

  const auto corpus = testing::toy_corpus();
  Bm25Index toy(corpus);
  for (const char* q : {"the university in Seoul", "film", "Korea drama 2003 debut"}) {
    for (std::size_t k = 1; k < 10; ++k) {
      const auto small = toy.search(q, k);
      const auto big = toy.search(q, k + 1);
      std::set<std::size_t> s, b;
      for (const auto& h : small) s.insert(h.passage);
      for (const auto& h : big) b.insert(h.passage);
      CHECK(std::includes(b.begin(), b.end(), s.begin(), s.end()));
      for (std::size_t i = 1; i < big.size(); ++i) CHECK(big[i - 1].score >= big[i].score);
    }
  }
}

TEST_CASE("re-indexing gives identical rankings") {
  Bm25Index a(testing::toy_corpus());
  Bm25Index b(testing::toy_corpus());
  for (const char* q : {"Sejong", "film", "who studied English"}) {
    const auto x = a.search(q, 10);
    const auto y = b.search(q, 10);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].passage == y[i].passage);
      CHECK(x[i].score == y[i].score);
    }
  }
}

TEST_CASE("material blocks") {
  std::vector<std::string> items;
  for (int i = 0; i < 10; ++i) items.push_back("t" + std::to_string(i));
  const auto block = format_materials(items);
  CHECK(block.starts_with("[0] t0\n[1] t1\n"));
  CHECK(block.ends_with("[9] t9"));
  CHECK(format_materials(std::vector<std::string>{}).empty());
  CHECK(format_materials(std::vector<std::string>{"body"}) == "[0] body");
  std::istringstream lines(block);
  std::string line;
  for (int i = 0; std::getline(lines, line); ++i) CHECK(line.starts_with("[" + std::to_string(i) + "] "));
  CHECK(error_of([] { format_materials(std::vector<std::string>(65, "x")); }) == ErrorCode::InvalidInput);
}

TEST_CASE("cosine and normalization") {
  const auto v = unit_normalize({3.0, 4.0});
  CHECK(std::abs(std::hypot(v[0], v[1]) - 1.0) < 1e-6);
  CHECK(cosine({1, 0}, {0.6, 0.8}) == doctest::Approx(0.6));
  CHECK(cosine({1, 0}, {-1, 0}) == doctest::Approx(-1.0));
  CHECK(error_of([] { cosine({1, 0}, {1, 0, 0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("embedding index ranks by cosine") {
  Corpus c({{"p1", "", "one"}, {"p2", "", "two"}, {"p3", "", "three"}});
  EmbeddingIndex idx(c, {{1, 0}, {0.6, 0.8}, {0, 1}}, nullptr);
  const auto hits = idx.search_vector({1, 0}, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].passage == 0);
  CHECK(hits[1].passage == 1);
  CHECK(hits[2].passage == 2);
  CHECK(hits[0].score == doctest::Approx(1.0));
  CHECK(hits[1].score == doctest::Approx(0.6));
  CHECK(hits[2].score == doctest::Approx(0.0));
  // without a service, text queries cannot be embedded
  CHECK(error_of([&] { idx.search("one", 1); }) == ErrorCode::ServiceUnavailable);
  CHECK(error_of([&] { idx.search_vector({1, 0, 0}, 1); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("orthogonal embeddings tie and fall back to id order") {
  Corpus c({{"b", "", "x"}, {"a", "", "y"}});
  EmbeddingIndex idx(c, {{0, 1}, {0, 1}}, nullptr);
  const auto hits = idx.search_vector({1, 0}, 2);
  REQUIRE(hits.size() == 2);
  CHECK(c[hits[0].passage].id == "a");
  CHECK(hits[0].score == doctest::Approx(0.0));
}

TEST_CASE("embedding service client and cache") {
  testing::StubServer stub;
  std::atomic<int> calls{0};
  stub.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (const auto& t : body.at("input")) {
      const auto s = t.get<std::string>();
      data.push_back({{"embedding", {s == "one" ? 1.0 : 0.0, s == "one" ? 0.0 : 1.0}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  stub.start();

  auto embedder = std::make_shared<const HttpEmbedder>(EmbeddingServiceConfig{stub.url(), "m", ""});
  Corpus c({{"p1", "", "one"}, {"p2", "", "two"}});
  auto idx = EmbeddingIndex::build(c, embedder);
  CHECK(idx.dimension() == 2);
  const auto hits = embed_retrieve(idx, "one", 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].passage == 0);

  const auto dir = testing::scratch_dir("emb");
  save_embedding_cache(dir / "cache.jsonl", c, idx.vectors());
  CHECK(load_embedding_cache(dir / "cache.jsonl", c) == idx.vectors());

  auto dead = HttpEmbedder(EmbeddingServiceConfig{"http://127.0.0.1:1", "m", "", std::chrono::milliseconds(500)});
  CHECK(error_of([&] { dead.embed({"x"}); }) == ErrorCode::ServiceUnavailable);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fluxmem/error.hpp"
#include "fluxmem/random.hpp"
#include "fluxmem/retrieval.hpp"

using namespace fluxmem;
using namespace fluxmem::retrieval;

namespace {

// Okapi BM25 written out term by term, independent of Bm25Index.
double okapi(double n_docs, double df, double tf, double doc_len, double avg_len, double k1,
             double b) {
  const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
  return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_len));
}

}  // namespace

TEST_CASE("bm25 single document hand case") {
  Bm25Index idx;
  idx.add_text("d1", "a b");
  const std::vector<std::string> q{"a"};
  CHECK(idx.score("d1", q) == doctest::Approx(okapi(1, 1, 1, 2, 2, 1.2, 0.75)).epsilon(1e-12));
  CHECK(idx.score("d1", q) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("bm25 multi document oracle") {
  Bm25Index idx(1.5, 0.5);
  idx.add_text("d1", "cat sat on the mat");
  idx.add_text("d2", "the dog chased the cat cat");
  idx.add_text("d3", "nothing relevant here");
  CHECK(idx.size() == 3);
  CHECK(idx.avg_doc_length() == doctest::Approx(14.0 / 3.0));
  CHECK(idx.document_frequency("cat") == 2);
  const std::vector<std::string> q{"cat", "the"};
  const double avg = 14.0 / 3.0;
  const double d2 = okapi(3, 2, 2, 6, avg, 1.5, 0.5) + okapi(3, 2, 2, 6, avg, 1.5, 0.5);
  CHECK(idx.score("d2", q) == doctest::Approx(d2).epsilon(1e-12));
  const auto ranked = bm25_rank(idx, q, 5);
  REQUIRE(ranked.size() == 2);  // d3 scores zero and is dropped
  CHECK(ranked[0].id == "d2");
  CHECK(ranked[1].id == "d1");
  CHECK_THROWS_AS(bm25_rank(idx, q, 0), InvalidArgument);
  CHECK_THROWS_AS(idx.add_text("d1", "dup"), InvalidArgument);
  CHECK(bm25_rank(Bm25Index{}, q, 3).empty());
  const std::vector<std::string> none{"zebra"};
  CHECK(bm25_rank(idx, none, 3).empty());
}

TEST_CASE("rrf fuses by reciprocal rank") {
  const std::vector<std::vector<std::string>> lists{{"a", "b", "c"}, {"a", "c"}};
  const auto fused = rrf(lists, 60);
  REQUIRE(fused.size() == 3);
  CHECK(fused[0].id == "a");
  CHECK(fused[0].score == doctest::Approx(2.0 / 61.0).epsilon(1e-12));
  CHECK(fused[1].id == "c");
  CHECK(fused[1].score == doctest::Approx(1.0 / 63.0 + 1.0 / 62.0));
  CHECK(fused[2].id == "b");
  // Equal scores fall back to id order.
  const std::vector<std::vector<std::string>> tie{{"y"}, {"x"}};
  const auto t = rrf(tie, 60);
  CHECK(t[0].id == "x");
}

TEST_CASE("dense ranking matches a brute-force sort") {
  Rng rng(9);
  std::vector<std::pair<std::string, Embedding>> items;
  for (int i = 0; i < 5; ++i) {
    Embedding v(8);
    for (auto& x : v) x = rng.normal();
    items.emplace_back("i" + std::to_string(i), v);
  }
  Embedding q(8);
  for (auto& x : q) x = rng.normal();
  const auto ranked = dense_rank(items, q, 5);
  std::vector<std::pair<double, std::string>> oracle;
  for (const auto& [id, v] : items) oracle.emplace_back(-cosine(v, q), id);
  std::sort(oracle.begin(), oracle.end());
  REQUIRE(ranked.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(ranked[i].id == oracle[i].second);
  // A planted copy of the query wins with score 1.
  items.emplace_back("copy", q);
  const auto top = dense_rank(items, q, 1);
  CHECK(top[0].id == "copy");
  CHECK(top[0].score == doctest::Approx(1.0));
}

TEST_CASE("render layout") {
  FusedContext ctx;
  ctx.query = "q?";
  CHECK(render(ctx) == "[QUERY] q?");
  Page p;
  p.id = "p";
  p.user_text = "u";
  p.agent_text = "a";
  p.timestamp = 3;
  ctx.stim_pages.push_back(p);
  LtsmEntry e;
  e.kind = FactKind::UserFact;
  e.content = "I like tea.";
  ctx.ltsm_hits.push_back({e, 0.5});
  CHECK(render(ctx) == "[RECENT]\n3\tUSER: u\tAGENT: a\n[SEMANTIC]\nuser_fact: I like tea.\n[QUERY] q?");
}

TEST_CASE("mock responder extracts the best sentence") {
  FusedContext ctx;
  ctx.query = "What is my cat called?";
  Page p;
  p.user_text = "I went out. My cat is called Pixel.";
  p.agent_text = "Nice.";
  ctx.stim_pages.push_back(p);
  MockResponder r;
  CHECK(r.respond(ctx) == "My cat is called Pixel.");
  const std::vector<std::string> choices{"Tom", "Pixel"};
  CHECK(r.respond(ctx, choices) == "Pixel");
  FusedContext empty;
  empty.query = "anything?";
  CHECK(r.respond(empty) == kAbstain);
}

TEST_CASE("fuse_context includes recent pages and bounds episodic hits") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  StimBuffer stim(4);
  stim.push(make_page("s1", "I am in Lisbon now", "ok", 100, embedder));
  MtemStore mtem(MtemConfig{}, 3600.0);
  GateConfig gate;
  MtemStore::IntegrationContext ictx{embedder, extractor, gate,
                                     [](const EpisodicSession&) { return StructureKind::Linear; },
                                     8};
  for (int i = 0; i < 12; ++i) {
    mtem.integrate({make_page("m" + std::to_string(i),
                              i == 3 ? "my cat is called Pixel" : "note number " + std::to_string(i),
                              "ok", i, embedder)},
                   ictx);
  }
  LtsmStore ltsm(LtsmConfig{}, 3600.0);
  RetrievalConfig cfg;
  const auto ctx = fuse_context("what is my cat called", stim, mtem, ltsm, extractor, embedder,
                                cfg, 200);
  CHECK(ctx.stim_pages.size() == 1);
  CHECK(ctx.mtem_hits.size() <= 5);
  REQUIRE_FALSE(ctx.mtem_hits.empty());
  CHECK(ctx.mtem_hits[0].page.id == "m3");
  CHECK(ctx.rendered == render(ctx));
  cfg.top_k = 0;
  CHECK_THROWS_AS(fuse_context("x", stim, mtem, ltsm, extractor, embedder, cfg, 200),
                  InvalidArgument);
}

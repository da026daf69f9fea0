#include <doctest.h>

#include <cmath>

#include "fluxmem/error.hpp"
#include "fluxmem/ltsm.hpp"

using namespace fluxmem;

namespace {

EpisodicSession session_with(const std::vector<std::string>& user_texts) {
  HashEmbedder e(384);
  EpisodicSession s;
  s.id = "S1";
  Timestamp ts = 0;
  for (const auto& t : user_texts) {
    s.pages.push_back(make_page("p" + std::to_string(ts), t, "", ts, e));
    ++ts;
  }
  return s;
}

}  // namespace

TEST_CASE("eligibility needs all three thresholds") {
  LtsmEntry e;
  e.usage = 1;  // 0.5 normalized
  e.recency = 0.3;
  e.confidence = 0.1;
  CHECK(eligible(e, {0.2, 0.2, 0.0}));
  CHECK_FALSE(eligible(e, {0.6, 0.2, 0.0}));
  CHECK_FALSE(eligible(e, {0.2, 0.4, 0.0}));
  CHECK_FALSE(eligible(e, {0.2, 0.2, 0.5}));
  e.usage = 0;
  CHECK_FALSE(eligible(e, {0.2, 0.2, 0.0}));
}

TEST_CASE("consolidation inserts facts and deduplicates repeats") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  LtsmStore store(LtsmConfig{}, 3600.0);
  auto s = session_with({"My name is Rui. I like green tea.", "The weather is nice."});
  const auto first = store.consolidate(s, extractor, embedder, 10);
  CHECK(first.size() == 2);
  CHECK(store.size() == 2);
  CHECK(store.entries()[0].source_session_id == "S1");
  const auto again = store.consolidate(s, extractor, embedder, 20);
  CHECK(again.size() == 2);
  CHECK(store.size() == 2);
  CHECK(store.entries()[0].last_used == 20);
}

TEST_CASE("retrieval bumps usage and keeps positive scores only") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  LtsmStore store(LtsmConfig{}, 3600.0);
  store.consolidate(session_with({"I adopted a cat named Pixel.", "I work as a data engineer."}),
                    extractor, embedder, 0);
  const auto hits = store.retrieve(embedder.embed("cat named Pixel"), 5, 100);
  REQUIRE_FALSE(hits.empty());
  CHECK(hits[0].entry.content == "I adopted a cat named Pixel.");
  for (const auto& h : hits) CHECK(h.score > 0.0);
  CHECK(store.retrieve(embedder.embed("zzzz qqqq"), 5, 100).empty());
  CHECK_THROWS_AS(store.retrieve(embedder.embed("cat"), 0, 100), InvalidArgument);
  for (const auto& e : store.entries()) {
    if (e.content == "I adopted a cat named Pixel.") {
      CHECK(e.usage == 1);
      CHECK(e.last_used == 100);
    }
  }
}

TEST_CASE("decay is exponential in time since last use") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  LtsmStore store(LtsmConfig{}, 100.0);
  store.consolidate(session_with({"I like tea."}), extractor, embedder, 0);
  store.decay(100);
  CHECK(store.entries()[0].recency == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("prune drops ineligible entries before eligible ones") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  LtsmStore store(LtsmConfig{}, 3600.0);
  store.consolidate(session_with({"I like tea.", "I own a red bike.", "I live in Porto."}),
                    extractor, embedder, 0);
  REQUIRE(store.size() == 3);
  // Make "I own a red bike." eligible by using it.
  store.retrieve(embedder.embed("red bike"), 1, 0);
  const auto removed = store.prune(1);
  CHECK(removed.size() == 2);
  REQUIRE(store.size() == 1);
  CHECK(store.entries()[0].content == "I own a red bike.");
  CHECK(store.prune(5).empty());
}

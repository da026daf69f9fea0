#include <doctest.h>

#include <cmath>

#include "fluxmem/core.hpp"
#include "fluxmem/error.hpp"
#include "fluxmem/random.hpp"

using namespace fluxmem;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  const auto t = tokenize("Hello, World! it's 2024");
  REQUIRE(t.size() == 5);
  CHECK(t[0] == "hello");
  CHECK(t[1] == "world");
  CHECK(t[2] == "it");
  CHECK(t[3] == "s");
  CHECK(t[4] == "2024");
  CHECK(tokenize("  ...  ").empty());
  CHECK(to_lower("MiXeD") == "mixed");
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("cosine and norms") {
  const std::vector<double> a{1, 0, 0};
  const std::vector<double> b{0, 2, 0};
  const std::vector<double> c{3, 0, 0};
  const std::vector<double> z{0, 0, 0};
  CHECK(cosine(a, b) == doctest::Approx(0.0));
  CHECK(cosine(a, c) == doctest::Approx(1.0));
  CHECK(cosine(a, z) == 0.0);
  CHECK_THROWS_AS(cosine(a, std::vector<double>{1, 2}), DimensionMismatch);
  CHECK(l2_norm(std::vector<double>{3, 4}) == doctest::Approx(5.0));
  Embedding v{3, 4};
  normalize_in_place(v);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
}

TEST_CASE("hash embedder is deterministic and unit length") {
  HashEmbedder e(64);
  const auto x = e.embed("the cat sat on the mat");
  const auto y = e.embed("the cat sat on the mat");
  REQUIRE(x.size() == 64);
  CHECK(x == y);
  CHECK(l2_norm(x) == doctest::Approx(1.0));
  CHECK(cosine(x, e.embed("The CAT sat on the mat!")) == doctest::Approx(1.0));
  CHECK(cosine(x, e.embed("quantum chromodynamics lecture")) < 0.5);
  const auto empty = e.embed("");
  CHECK(l2_norm(empty) == 0.0);
}

TEST_CASE("hash embedder oracle: single token lands in its fnv bucket") {
  HashEmbedder e(16);
  const auto v = e.embed("pixel");
  std::size_t nonzero = 0;
  for (double x : v) nonzero += x != 0.0;
  CHECK(nonzero == 1);
  CHECK(v[fnv1a64("pixel", kHashEmbedderSeed) % 16] == doctest::Approx(1.0));
}

TEST_CASE("make_page joins texts and rejects negative timestamps") {
  HashEmbedder e(32);
  const auto p = make_page("p1", "hi there", "hello", 10, e);
  CHECK(p.text() == "hi there hello");
  CHECK(p.last_access == 10);
  CHECK(p.embedding.size() == 32);
  CHECK_THROWS_AS(make_page("p2", "x", "y", -1, e), InvalidArgument);
}

TEST_CASE("structure names round trip") {
  for (auto k : {StructureKind::Linear, StructureKind::Graph, StructureKind::Hierarchical}) {
    CHECK(structure_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(structure_from_string("tree"), InvalidArgument);
}

TEST_CASE("engine config validation") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.stim.capacity = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EngineConfig{};
  c.gate.threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EngineConfig{};
  c.gate.min_keep = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EngineConfig{};
  c.retrieval.top_k = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("rng is reproducible") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("parse error carries the line number") {
  ParseError e(7, "bad");
  CHECK(e.line() == 7);
  CHECK(std::string(e.what()).find("line 7") != std::string::npos);
}

#include <doctest.h>

#include <cmath>

#include "fluxmem/error.hpp"
#include "fluxmem/mtem.hpp"

using namespace fluxmem;

namespace {

struct Fixture {
  HashEmbedder embedder{384};
  RuleExtractor extractor;
  GateConfig gate;
  StructureKind kind = StructureKind::Linear;

  MtemStore::IntegrationContext ctx() {
    return {embedder, extractor, gate, [this](const EpisodicSession&) { return kind; }, 8};
  }
  Page page(const std::string& id, const std::string& text, Timestamp ts,
            const std::string& agent = "ok") {
    return make_page(id, text, agent, ts, embedder);
  }
};

}  // namespace

TEST_CASE("first page opens a session, similar pages merge, unrelated ones split") {
  Fixture f;
  MtemStore store(MtemConfig{}, 3600.0);
  auto r1 = store.integrate({f.page("a", "my cat Pixel likes fish", 1)}, f.ctx());
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].created_session);
  auto r2 = store.integrate({f.page("b", "my cat Pixel likes fish and naps", 2)}, f.ctx());
  CHECK_FALSE(r2[0].created_session);
  CHECK(r2[0].session_id == r1[0].session_id);
  auto r3 = store.integrate({f.page("c", "quarterly tax deadline for invoices", 3)}, f.ctx());
  CHECK(r3[0].created_session);
  CHECK(store.size() == 2);
  CHECK(store.page_count() == 3);
  const auto* s = store.find(r1[0].session_id);
  REQUIRE(s != nullptr);
  CHECK(s->pages.size() == 2);
  CHECK(s->find_page("b") != nullptr);
  CHECK_FALSE(s->summary.empty());
}

TEST_CASE("cosine threshold gate mode") {
  Fixture f;
  f.gate.mode = GateMode::CosineThreshold;
  f.gate.cosine_threshold = 0.99;
  MtemStore store(MtemConfig{}, 3600.0);
  store.integrate({f.page("a", "my cat Pixel likes fish", 1)}, f.ctx());
  auto r = store.integrate({f.page("b", "my cat Pixel likes fish and naps", 2)}, f.ctx());
  CHECK(r[0].created_session);
}

TEST_CASE("incremental index equals a rebuild for every structure") {
  for (auto kind : {StructureKind::Linear, StructureKind::Graph, StructureKind::Hierarchical}) {
    Fixture f;
    f.kind = kind;
    MtemStore store(MtemConfig{}, 3600.0);
    const std::vector<std::string> texts{
        "Ana and Bruno cooked dinner with the cat",
        "the cat Pixel slept while Ana read",
        "Bruno fixed the bike with Carla",
        "the cat Pixel chased Carla around the bike"};
    for (std::size_t i = 0; i < texts.size(); ++i) {
      store.integrate({f.page("p" + std::to_string(i), texts[i], static_cast<Timestamp>(i))},
                      f.ctx());
    }
    for (const auto& s : store.sessions()) {
      CHECK(kind_of(s.index) == kind);
      const auto rebuilt = build_structure_index(s, kind, f.extractor);
      if (kind == StructureKind::Linear) {
        CHECK(std::get<LinearIndex>(rebuilt).page_ids ==
              std::get<LinearIndex>(s.index).page_ids);
      } else if (kind == StructureKind::Graph) {
        const auto& a = std::get<GraphIndex>(rebuilt);
        const auto& b = std::get<GraphIndex>(s.index);
        CHECK(a.nodes == b.nodes);
        CHECK(a.edges.size() == b.edges.size());
      } else {
        const auto& a = std::get<HierIndex>(rebuilt);
        const auto& b = std::get<HierIndex>(s.index);
        REQUIRE(a.topics.size() == b.topics.size());
        for (std::size_t t = 0; t < a.topics.size(); ++t) {
          CHECK(a.topics[t].page_ids == b.topics[t].page_ids);
        }
      }
    }
  }
}

TEST_CASE("graph expansion follows one edge") {
  GraphIndex g;
  g.nodes["ana"] = {"p1"};
  g.nodes["bruno"] = {"p1", "p2"};
  g.nodes["carla"] = {"p2"};
  g.edges[{"ana", "bruno"}] = {1, std::nullopt};
  g.edges[{"bruno", "carla"}] = {1, std::nullopt};
  const std::vector<std::string> q{"ana"};
  CHECK(g.expand(q) == std::set<std::string>{"ana", "bruno"});
  const std::vector<std::string> q2{"bruno"};
  CHECK(g.expand(q2) == std::set<std::string>{"ana", "bruno", "carla"});
}

TEST_CASE("topic clustering joins by centroid cosine") {
  const std::vector<Embedding> e{{1, 0}, {0.9, 0.1}, {0, 1}, {0.1, 0.9}};
  const auto topics = cluster_topics(e, 0.5);
  REQUIRE(topics.size() == 2);
  CHECK(topics[0] == std::vector<std::size_t>{0, 1});
  CHECK(topics[1] == std::vector<std::size_t>{2, 3});
  CHECK(cluster_topics(e, 1.1).size() == 4);
}

TEST_CASE("utility formula") {
  EpisodicSession s;
  s.access_count = 1;
  s.pages.resize(16);
  s.updated_at = 0;
  UtilityInputs in;
  in.weights = {0.5, 0.25, 0.25};
  in.max_session_pages = 32;
  in.half_life = 100.0;
  in.now = 100;
  const double expected = 0.5 * 0.5 + 0.25 * 0.5 + 0.25 * std::exp(-1.0);
  CHECK(utility(s, in) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("retrieval is ordered and bounded") {
  Fixture f;
  MtemStore store(MtemConfig{}, 3600.0);
  for (int i = 0; i < 10; ++i) {
    store.integrate({f.page("p" + std::to_string(i),
                            i % 2 ? "my cat Pixel likes fish" : "tax invoices due soon", i)},
                    f.ctx());
  }
  const auto q = f.embedder.embed("what does my cat like");
  const auto hits = store.retrieve(q, {}, 3, 10);
  REQUIRE(hits.size() == 3);
  for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].score >= hits[i].score);
  CHECK(hits[0].page.user_text.find("cat") != std::string::npos);
}

TEST_CASE("prune removes the lowest utility sessions down to capacity") {
  Fixture f;
  MtemStore store(MtemConfig{}, 3600.0);
  const std::vector<std::string> texts{"alpha beta gamma", "tax invoices due", "cat fish naps",
                                       "guitar strings tune", "garden tomato soil"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    store.integrate(
        {f.page("p" + std::to_string(i), texts[i], static_cast<Timestamp>(i * 1000), "")},
        f.ctx());
  }
  REQUIRE(store.size() == 5);
  const auto before = store.page_count();
  auto result = store.prune(3, 5000);
  CHECK(store.size() == 3);
  std::size_t removed_pages = 0;
  for (const auto& s : result.removed) removed_pages += s.pages.size();
  CHECK(store.page_count() + removed_pages == before);
  // The two oldest sessions go first when the rest of the utility is equal.
  REQUIRE(result.removed.size() == 2);
  CHECK(result.removed[0].pages[0].id == "p0");
  CHECK(result.removed[1].pages[0].id == "p1");
}

TEST_CASE("restructure swaps the index kind") {
  Fixture f;
  MtemStore store(MtemConfig{}, 3600.0);
  auto r = store.integrate({f.page("a", "Ana met Bruno", 1)}, f.ctx());
  store.restructure(r[0].session_id, StructureKind::Graph, f.extractor);
  CHECK(store.find(r[0].session_id)->structure_kind == StructureKind::Graph);
  CHECK(kind_of(store.find(r[0].session_id)->index) == StructureKind::Graph);
  CHECK_THROWS_AS(store.restructure("missing", StructureKind::Graph, f.extractor),
                  InvalidArgument);
}

#include <doctest.h>

#include <cstdio>

#include "fluxmem/error.hpp"
#include "fluxmem/engine.hpp"
#include "fluxmem/snapshot.hpp"
#include "fluxmem/synthetic.hpp"
#include "support.hpp"

using namespace fluxmem;

namespace {

Engine demo_engine() {
  Engine engine(EngineConfig{}, Providers::deterministic());
  for (const auto& line : synthetic::demo_transcript()) {
    engine.observe(line.user, line.agent, line.timestamp);
  }
  return engine;
}

}  // namespace

TEST_CASE("observation moves pages down the layers and conserves them") {
  Engine engine(EngineConfig{}, Providers::deterministic());
  for (int i = 0; i < 12; ++i) {
    const auto t = engine.observe("note " + std::to_string(i) + " about my garden", "ok", i * 60);
    CHECK(t.counts.stim <= 4);
    CHECK(t.counts.stim + t.counts.mtem_pages + t.counts.pruned_pages == t.counts.observed);
    char expected[16];
    std::snprintf(expected, sizeof(expected), "p%06d", i + 1);
    CHECK(t.page_id == expected);
  }
  CHECK(engine.stim().size() == 4);
  CHECK(engine.mtem().page_count() == 8);
  CHECK(engine.recent().size() == 8);
}

TEST_CASE("timestamps and ids are validated") {
  Engine engine(EngineConfig{}, Providers::deterministic());
  engine.observe_with_id("x", "hello", "hi", 100);
  CHECK_THROWS_AS(engine.observe("older", "", 50), InvalidArgument);
  CHECK_THROWS_AS(engine.observe("negative", "", -1), InvalidArgument);
  CHECK_THROWS_AS(engine.observe_with_id("x", "again", "", 200), InvalidArgument);
  EngineConfig bad;
  bad.stim.capacity = 0;
  CHECK_THROWS_AS(Engine(bad, Providers::deterministic()), InvalidArgument);
}

TEST_CASE("ask answers from memory") {
  auto engine = demo_engine();
  const auto r = engine.ask("What is the name of my cat?");
  CHECK(r.answer == "I adopted a cat named Pixel last week.");
  CHECK(r.context.rendered.find("[QUERY] What is the name of my cat?") != std::string::npos);
  const std::vector<std::string> choices{"Lisbon", "Pixel"};
  CHECK(engine.ask("Which city did I move to?", choices).answer == "Lisbon");
}

TEST_CASE("forced structure applies to every session") {
  EngineConfig cfg;
  cfg.selector.forced = StructureKind::Graph;
  Engine engine(cfg, Providers::deterministic());
  for (const auto& line : synthetic::demo_transcript()) {
    engine.observe(line.user, line.agent, line.timestamp);
  }
  REQUIRE(engine.mtem().size() > 0);
  for (const auto& s : engine.mtem().sessions()) CHECK(s.structure_kind == StructureKind::Graph);
  CHECK(engine.choose_structure() == StructureKind::Graph);
}

TEST_CASE("snapshot round trip restores an equivalent engine") {
  auto engine = demo_engine();
  const auto snap = engine_to_json(engine);
  CHECK(snap.at("format") == std::string(kSnapshotFormat));
  auto restored = engine_from_json(snap, Providers::deterministic());
  CHECK(dump_snapshot(engine_to_json(restored)) == dump_snapshot(snap));
  // Both continue identically.
  engine.observe("I bought a new lamp.", "Nice.", 1700099999);
  restored.observe("I bought a new lamp.", "Nice.", 1700099999);
  CHECK(dump_snapshot(engine_to_json(restored)) == dump_snapshot(engine_to_json(engine)));
  CHECK(restored.ask("What is the name of my cat?").answer ==
        engine.ask("What is the name of my cat?").answer);
}

TEST_CASE("snapshot files, plain and gzip") {
  testing::TempDir dir("snap");
  const auto snap = engine_to_json(demo_engine());
  save_snapshot(dir / "a.json", snap);
  save_snapshot(dir / "a.json.gz", snap, true);
  CHECK(load_snapshot(dir / "a.json") == snap);
  CHECK(load_snapshot(dir / "a.json.gz") == snap);
  CHECK(testing::read_file(dir / "a.json") == dump_snapshot(snap));
  CHECK(testing::read_file(dir / "a.json.gz").substr(0, 2) == "\x1f\x8b");
  CHECK_THROWS_AS(load_snapshot(dir / "missing.json"), InvalidArgument);
  testing::write_file(dir / "junk.json", "{nope");
  CHECK_THROWS_AS(load_snapshot(dir / "junk.json"), InvalidArgument);
  auto wrong = snap;
  wrong["format"] = "other/9";
  CHECK_THROWS_AS(engine_from_json(wrong, Providers::deterministic()), InvalidArgument);
}

TEST_CASE("config json and overrides") {
  EngineConfig c;
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
  const auto o = apply_override(c, "gate.threshold=0.7");
  CHECK(o.gate.threshold == 0.7);
  CHECK(apply_override(c, "selector.forced=\"graph\"").selector.forced == StructureKind::Graph);
  CHECK(config_fingerprint(o) != config_fingerprint(c));
  CHECK(config_fingerprint(c).size() == 16);
  CHECK_THROWS_AS(apply_override(c, "gate.nope=1"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(c, "gate.threshold=2"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(c, "no-equals-sign"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), InvalidArgument);
}

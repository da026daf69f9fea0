#include <doctest.h>

#include <cmath>

#include "fluxmem/error.hpp"
#include "fluxmem/evalkit.hpp"
#include "fluxmem/synthetic.hpp"
#include "support.hpp"

using namespace fluxmem;
using namespace fluxmem::evalkit;
using nlohmann::json;

namespace {

json small_case() {
  return json::parse(R"({
    "id": "c1", "question": "What is my cat called?", "gold_answer": "Pixel",
    "gold_evidence_ids": ["D1:2"], "category": "single",
    "conversation": [[
      {"speaker": "user", "text": "Hi there.", "timestamp": 10},
      {"speaker": "assistant", "text": "Hello.", "timestamp": 11},
      {"speaker": "user", "text": "My cat is called Pixel.", "timestamp": 20},
      {"speaker": "assistant", "text": "Cute.", "timestamp": 21},
      {"speaker": "assistant", "text": "Really cute.", "timestamp": 22}
    ], [
      {"speaker": "user", "text": "I like tea.", "timestamp": 100}
    ]]
  })");
}

}  // namespace

TEST_CASE("token f1") {
  CHECK(token_f1("blue car", "red car") == 0.5);
  CHECK(token_f1("", "") == 1.0);
  CHECK(token_f1("x", "") == 0.0);
  CHECK(token_f1("The Cat", "the cat") == 1.0);
}

TEST_CASE("bleu1 with brevity penalty") {
  CHECK(bleu1("the cat", "the cat sat") == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(bleu1("the cat sat", "the cat sat") == doctest::Approx(1.0));
  // Clipped counts: "the the the" against "the cat" has one usable "the".
  CHECK(bleu1("the the the", "the cat") == doctest::Approx(1.0 / 3.0));
  CHECK(bleu1("", "x") == 0.0);
}

TEST_CASE("rouge") {
  const auto l = rouge_l("the cat sat", "the cat ran");
  CHECK(l.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const auto r1 = rouge_n("the cat sat", "the cat ran", 1);
  CHECK(r1.precision == doctest::Approx(2.0 / 3.0));
  const auto r2 = rouge_n("the cat sat", "the cat ran", 2);
  CHECK(r2.f1 == doctest::Approx(0.5));
  CHECK(rouge_n("cat", "cat", 2).f1 == 1.0);
  CHECK(rouge_n("cat", "dog", 2).f1 == 0.0);
  CHECK_THROWS_AS(rouge_n("a", "b", 3), InvalidArgument);
  const std::vector<std::string> a{"a", "b", "c", "d"};
  const std::vector<std::string> b{"b", "d", "c"};
  CHECK(lcs_length(a, b) == 2);
}

TEST_CASE("accuracy and mem reward") {
  const std::vector<std::string> p{" Yes", "no"};
  const std::vector<std::string> g{"yes", "maybe"};
  CHECK(accuracy(p, g) == 0.5);
  CHECK_THROWS_AS(accuracy(p, std::vector<std::string>{"x"}), InvalidArgument);
  const std::vector<std::string> got{"a", "b"};
  const std::vector<std::string> gold{"b", "c", "d", "e"};
  CHECK(mem_reward(got, gold) == 0.25);
  CHECK(mem_reward(got, std::vector<std::string>{}) == 0.0);
}

TEST_CASE("case parsing and page splitting") {
  const auto c = case_from_json(small_case(), 1);
  CHECK(c.id == "c1");
  CHECK(c.category == "single");
  const auto pages = conversation_pages(c);
  REQUIRE(pages.size() == 3);
  CHECK(pages[0].id == "D1:1");
  CHECK(pages[1].id == "D1:2");
  CHECK(pages[1].user_text == "My cat is called Pixel.");
  CHECK(pages[1].agent_text == "Cute. Really cute.");
  CHECK(pages[2].id == "D2:1");
  CHECK(pages[2].agent_text.empty());
  const auto back = case_from_json(case_to_json(c), 1);
  CHECK(case_to_json(back) == case_to_json(c));
}

TEST_CASE("case validation names the line") {
  auto j = small_case();
  j.erase("question");
  CHECK_THROWS_AS(case_from_json(j, 4), ParseError);
  j = small_case();
  j["conversation"][0][1]["timestamp"] = 5;
  try {
    case_from_json(j, 9);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 9);
  }
  j = small_case();
  j["choices"] = json::array();
  CHECK_THROWS_AS(case_from_json(j, 1), ParseError);

  testing::TempDir dir("cases");
  testing::write_file(dir / "bad.jsonl", small_case().dump() + "\n\n{oops\n");
  try {
    load_cases(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("cases save and load") {
  testing::TempDir dir("roundtrip");
  const auto suite = synthetic::mixed_suite(1, 3, "t");
  save_cases(dir / "s.jsonl", suite);
  const auto back = load_cases(dir / "s.jsonl");
  REQUIRE(back.size() == suite.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(case_to_json(back[i]) == case_to_json(suite[i]));
  }
}

TEST_CASE("replay modes") {
  for (auto m : all_replay_modes()) CHECK(replay_mode_from_string(to_string(m)) == m);
  CHECK(all_replay_modes().size() == 8);
  CHECK_THROWS_AS(replay_mode_from_string("fast"), InvalidArgument);
  const EngineConfig base;
  CHECK(config_for_mode(base, ReplayMode::FixedGraph).selector.forced == StructureKind::Graph);
  CHECK(config_for_mode(base, ReplayMode::NoBmm).gate.mode == GateMode::CosineThreshold);
  CHECK(config_for_mode(base, ReplayMode::AblateHier).selector.disabled ==
        std::vector<StructureKind>{StructureKind::Hierarchical});
}

TEST_CASE("replay scores a case and aggregates") {
  const auto c = case_from_json(small_case(), 1);
  ReplaySetup setup{EngineConfig{}, Providers::deterministic(), std::nullopt, 42};
  const std::vector<BenchmarkCase> cases{c};
  auto report = replay(cases, setup, ReplayMode::FixedLinear);
  REQUIRE(report.cases.size() == 1);
  const auto& r = report.cases[0];
  CHECK_FALSE(r.error.has_value());
  CHECK(r.answer == "My cat is called Pixel.");
  REQUIRE(r.mem_reward.has_value());
  CHECK(*r.mem_reward == 1.0);  // three pages all still in the short-term buffer
  CHECK(report.overall.cases == 1);
  CHECK(report.categories.at("single").mem_reward == 1.0);
  const auto j = report_to_json(report);
  CHECK(j.at("schema") == std::string(kReportSchema));
  CHECK(format_table(report).find("single") != std::string::npos);
}

TEST_CASE("labeling picks the best structure per case") {
  const auto suite = synthetic::mixed_suite(1, 5, "lab");
  ReplaySetup setup{EngineConfig{}, Providers::deterministic(), std::nullopt, 42};
  const auto labeled = label_dataset(suite, setup);
  REQUIRE(labeled.size() == suite.size());
  for (const auto& ex : labeled) {
    const auto best = selector::argmax(ex.rewards);
    CHECK(static_cast<std::size_t>(ex.label) == best);
  }
}

#include <doctest.h>

#include <cmath>

#include "fluxmem/error.hpp"
#include "fluxmem/random.hpp"
#include "fluxmem/selector.hpp"
#include "fluxmem/synthetic.hpp"

using namespace fluxmem;
using namespace fluxmem::selector;

namespace {

SelectorModel random_model(Rng& rng) {
  SelectorModel m;
  std::vector<double> p(SelectorModel::kParamCount);
  for (auto& v : p) v = rng.normal() * 0.5;
  m.set_parameters(p);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    m.scaler_mean[i] = rng.normal();
    m.scaler_std[i] = 0.5 + rng.uniform();
  }
  return m;
}

LabeledExample random_example(Rng& rng) {
  LabeledExample e;
  for (auto& f : e.features) f = rng.normal() * 2.0;
  e.label = static_cast<StructureKind>(rng.index(3));
  return e;
}

}  // namespace

TEST_CASE("feature extraction on a hand-built window") {
  HashEmbedder embedder(384);
  RuleExtractor extractor;
  std::vector<Page> w{
      make_page("a", "Did Ana call?", "yes", 0, embedder),
      make_page("b", "Did Ana write?", "no", 3600, embedder),
      make_page("c", "If it rains we stay.", "fine", 7200, embedder),
  };
  const auto f = extract_features(w, extractor);
  CHECK(f[kPageCount] == 3.0);
  CHECK(f[kAvgPageLength] == doctest::Approx((4.0 + 4.0 + 6.0) / 3.0));
  // "did ana" is one capitalized run on the first two pages.
  CHECK(f[kEntityDensity] == doctest::Approx(2.0 / 3.0));
  CHECK(f[kIsQnaPattern] == 0.0);  // 2 of 3 < 0.7
  CHECK(f[kIsDecisionTree] == 0.0);
  CHECK(f[kIsEntityCentric] == 1.0);
  CHECK(f[kTimeSpan] == doctest::Approx(2.0));
  CHECK(f[kTemporalDensity] == doctest::Approx(1.5));
  CHECK(f[kSemanticComplexity] >= 0.0);
  CHECK(feature_names().size() == kFeatureCount);
  CHECK_THROWS_AS(extract_features(std::span<const Page>{}, extractor), InvalidArgument);
}

TEST_CASE("forward is a probability distribution") {
  Rng rng(5);
  const auto m = random_model(rng);
  const auto e = random_example(rng);
  const auto p = forward(m, e.features);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
  for (double v : p) CHECK(v >= 0.0);
}

TEST_CASE("selection honours disabled structures and tie order") {
  SelectorModel m;  // all zero weights: uniform output
  FeatureVector f{};
  CHECK(select_structure(m, f) == StructureKind::Linear);
  const std::vector<StructureKind> off{StructureKind::Linear};
  CHECK(select_structure(m, f, off) == StructureKind::Graph);
  const std::vector<double> v{0.2, 0.5, 0.5};
  CHECK(argmax(v) == 1);
}

TEST_CASE("reward mixes judge and memory scores") {
  CHECK(compute_reward(0.5, 1.0, 0.7, 0.3) == doctest::Approx(0.65));
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_model(rng);
    std::vector<LabeledExample> batch{random_example(rng), random_example(rng)};
    const auto lg = loss_and_gradient(m, batch);
    CHECK(lg.loss == doctest::Approx(mean_loss(m, batch)));
    auto p = m.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double h = 1e-5;
      auto plus = m, minus = m;
      auto pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      plus.set_parameters(pp);
      minus.set_parameters(pm);
      const double numeric = (mean_loss(plus, batch) - mean_loss(minus, batch)) / (2 * h);
      CHECK(lg.gradient[i] == doctest::Approx(numeric).epsilon(1e-4).scale(1e-6));
    }
  }
}

TEST_CASE("training is deterministic and learns separable clusters") {
  const auto data = synthetic::cluster_dataset(90, 7);
  TrainOptions opt;
  opt.epochs = 60;
  const auto a = train(data, opt);
  const auto b = train(data, opt);
  CHECK(a.model.parameters() == b.model.parameters());
  CHECK(a.train_accuracy >= 0.95);
  CHECK(a.epochs_run <= 60);
  CHECK_THROWS_AS(train(std::span<const LabeledExample>{}, opt), InvalidArgument);
}

TEST_CASE("model and example json round trip") {
  Rng rng(2);
  const auto m = random_model(rng);
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.parameters() == m.parameters());
  CHECK(back.scaler_std == m.scaler_std);
  auto j = model_to_json(m);
  j["format"] = "other/1";
  CHECK_THROWS_AS(model_from_json(j), InvalidArgument);

  LabeledExample e = random_example(rng);
  e.rewards = {0.1, 0.2, 0.3};
  e.source = "case-1";
  const auto eb = example_from_json(example_to_json(e));
  CHECK(eb.features == e.features);
  CHECK(eb.label == e.label);
  CHECK(eb.rewards == e.rewards);
  CHECK(eb.source == "case-1");
}

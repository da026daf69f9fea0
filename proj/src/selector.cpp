#include "fluxmem/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fluxmem/mtem.hpp"
#include "fluxmem/random.hpp"

namespace fluxmem::selector {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "page_count",        "avg_page_length",  "entity_density", "relation_indicators",
      "topic_diversity",   "topic_transitions", "is_qna_pattern", "is_decision_tree",
      "is_entity_centric", "time_span",         "temporal_density", "semantic_complexity"};
  return names;
}

const std::vector<std::string>& relational_cues() {
  static const std::vector<std::string> cues = {"because", "than",   "compared", "refers",
                                                "depends", "before", "after",    "between"};
  return cues;
}

const std::vector<std::string>& conditional_cues() {
  static const std::vector<std::string> cues = {"if", "else", "option", "choose"};
  return cues;
}

namespace {

bool contains(const std::vector<std::string>& list, const std::string& token) {
  return std::find(list.begin(), list.end(), token) != list.end();
}

bool ends_with_question(std::string_view text) {
  const auto last = text.find_last_not_of(" \t\r\n");
  return last != std::string_view::npos && text[last] == '?';
}

}  // namespace

FeatureVector extract_features(std::span<const Page> window, const Extractor& extractor,
                               const FeatureRules& rules) {
  if (window.empty()) throw InvalidArgument("feature extraction needs at least one page");
  FeatureVector f{};
  const auto n = static_cast<double>(window.size());
  f[kPageCount] = n;

  double tokens = 0.0;
  double entity_total = 0.0;
  double cue_total = 0.0;
  std::map<std::string, int> pages_per_entity;
  std::vector<Embedding> embeddings;
  embeddings.reserve(window.size());
  int questions = 0;
  int conditional_run = 0;
  int longest_conditional_run = 0;

  for (const auto& page : window) {
    const auto text = page.text();
    const auto toks = tokenize(text);
    tokens += static_cast<double>(toks.size());
    for (const auto& t : toks) {
      if (contains(relational_cues(), t)) cue_total += 1.0;
    }
    const auto entities = extractor.extract_entities(text);
    entity_total += static_cast<double>(entities.size());
    for (const auto& e : entities) pages_per_entity[e] += 1;
    embeddings.push_back(page.embedding);

    if (ends_with_question(page.user_text)) ++questions;
    const auto user_toks = tokenize(page.user_text);
    const bool conditional = std::any_of(user_toks.begin(), user_toks.end(), [](const auto& t) {
      return contains(conditional_cues(), t);
    });
    conditional_run = conditional ? conditional_run + 1 : 0;
    longest_conditional_run = std::max(longest_conditional_run, conditional_run);
  }

  f[kAvgPageLength] = tokens / n;
  f[kEntityDensity] = entity_total / n;
  f[kRelationIndicators] = cue_total / n;
  f[kTopicDiversity] =
      static_cast<double>(cluster_topics(embeddings, rules.topic_join_threshold).size());

  int transitions = 0;
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    if (cosine(embeddings[i - 1], embeddings[i]) < rules.topic_join_threshold) ++transitions;
  }
  f[kTopicTransitions] =
      static_cast<double>(transitions) / std::max(1.0, static_cast<double>(window.size()) - 1.0);

  f[kIsQnaPattern] = static_cast<double>(questions) / n >= rules.qna_fraction ? 1.0 : 0.0;
  f[kIsDecisionTree] = longest_conditional_run >= rules.decision_run ? 1.0 : 0.0;
  int modal = 0;
  for (const auto& [entity, count] : pages_per_entity) modal = std::max(modal, count);
  f[kIsEntityCentric] =
      modal > 0 && static_cast<double>(modal) / n >= rules.entity_centric_fraction ? 1.0 : 0.0;

  Timestamp lo = window.front().timestamp;
  Timestamp hi = window.front().timestamp;
  for (const auto& page : window) {
    lo = std::min(lo, page.timestamp);
    hi = std::max(hi, page.timestamp);
  }
  f[kTimeSpan] = static_cast<double>(hi - lo) / 3600.0;
  f[kTemporalDensity] = n / std::max(f[kTimeSpan], 1.0 / 60.0);

  double dispersion = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      dispersion += 1.0 - cosine(embeddings[i], embeddings[j]);
      ++pairs;
    }
  }
  f[kSemanticComplexity] = pairs > 0 ? dispersion / pairs : 0.0;
  return f;
}

std::vector<double> SelectorModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(kParamCount);
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.insert(flat.end(), b2.begin(), b2.end());
  return flat;
}

void SelectorModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != kParamCount) throw DimensionMismatch(kParamCount, flat.size());
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  std::copy_n(it, b2.size(), b2.begin());
}

namespace {

struct Activations {
  FeatureVector scaled{};
  std::array<double, kHiddenSize> pre{};
  std::array<double, kHiddenSize> hidden{};
  std::array<double, kClassCount> logits{};
  std::array<double, kClassCount> probs{};
  double log_norm = 0.0;
};

Activations run(const SelectorModel& m, const FeatureVector& x) {
  Activations a;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    a.scaled[i] = (x[i] - m.scaler_mean[i]) / std::max(m.scaler_std[i], kStdFloor);
  }
  for (std::size_t h = 0; h < kHiddenSize; ++h) {
    double z = m.b1[h];
    for (std::size_t i = 0; i < kFeatureCount; ++i) z += m.w1[h * kFeatureCount + i] * a.scaled[i];
    a.pre[h] = z;
    a.hidden[h] = z > 0.0 ? z : 0.0;
  }
  for (std::size_t c = 0; c < kClassCount; ++c) {
    double z = m.b2[c];
    for (std::size_t h = 0; h < kHiddenSize; ++h) z += m.w2[c * kHiddenSize + h] * a.hidden[h];
    a.logits[c] = z;
  }
  const double peak = *std::max_element(a.logits.begin(), a.logits.end());
  double total = 0.0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    a.probs[c] = std::exp(a.logits[c] - peak);
    total += a.probs[c];
  }
  for (auto& p : a.probs) p /= total;
  a.log_norm = peak + std::log(total);
  return a;
}

}  // namespace

std::array<double, kClassCount> forward(const SelectorModel& model, const FeatureVector& features) {
  return run(model, features).probs;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

StructureKind select_structure(const SelectorModel& model, const FeatureVector& features,
                               std::span<const StructureKind> disabled) {
  const auto probs = forward(model, features);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const auto kind = static_cast<StructureKind>(c);
    if (std::find(disabled.begin(), disabled.end(), kind) != disabled.end()) continue;
    if (!best || probs[c] > probs[*best]) best = c;
  }
  if (!best) throw InvalidArgument("every structure is disabled");
  return static_cast<StructureKind>(*best);
}

double compute_reward(double judge_score, double mem_score, double lambda_q, double lambda_m) {
  if (lambda_q < 0.0 || lambda_m < 0.0) throw InvalidArgument("reward weights must be >= 0");
  return lambda_q * judge_score + lambda_m * mem_score;
}

LossGradient loss_and_gradient(const SelectorModel& model,
                               std::span<const LabeledExample> batch) {
  LossGradient out;
  out.gradient.assign(SelectorModel::kParamCount, 0.0);
  if (batch.empty()) return out;

  constexpr std::size_t kW1 = 0;
  constexpr std::size_t kB1 = kW1 + kHiddenSize * kFeatureCount;
  constexpr std::size_t kW2 = kB1 + kHiddenSize;
  constexpr std::size_t kB2 = kW2 + kClassCount * kHiddenSize;
  auto& g = out.gradient;

  for (const auto& ex : batch) {
    const auto a = run(model, ex.features);
    const auto y = static_cast<std::size_t>(ex.label);
    out.loss += a.log_norm - a.logits[y];

    std::array<double, kClassCount> d_logits = a.probs;
    d_logits[y] -= 1.0;
    std::array<double, kHiddenSize> d_hidden{};
    for (std::size_t c = 0; c < kClassCount; ++c) {
      g[kB2 + c] += d_logits[c];
      for (std::size_t h = 0; h < kHiddenSize; ++h) {
        g[kW2 + c * kHiddenSize + h] += d_logits[c] * a.hidden[h];
        d_hidden[h] += model.w2[c * kHiddenSize + h] * d_logits[c];
      }
    }
    for (std::size_t h = 0; h < kHiddenSize; ++h) {
      const double d_pre = a.pre[h] > 0.0 ? d_hidden[h] : 0.0;
      g[kB1 + h] += d_pre;
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        g[kW1 + h * kFeatureCount + i] += d_pre * a.scaled[i];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (auto& v : g) v *= inv;
  return out;
}

double mean_loss(const SelectorModel& model, std::span<const LabeledExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    const auto a = run(model, ex.features);
    total += a.log_norm - a.logits[static_cast<std::size_t>(ex.label)];
  }
  return total / static_cast<double>(examples.size());
}

double accuracy(const SelectorModel& model, std::span<const LabeledExample> examples) {
  if (examples.empty()) return 0.0;
  int correct = 0;
  for (const auto& ex : examples) {
    if (select_structure(model, ex.features) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

TrainResult train(std::span<const LabeledExample> dataset, const TrainOptions& options) {
  if (dataset.empty()) throw InvalidArgument("cannot train on an empty dataset");
  if (options.batch_size < 1 || options.epochs < 1) {
    throw InvalidArgument("epochs and batch_size must be positive");
  }
  Rng rng(options.seed);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto held_out = static_cast<std::size_t>(
      std::floor(options.validation_fraction * static_cast<double>(dataset.size())));
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> training;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < held_out ? validation : training).push_back(dataset[order[i]]);
  }

  SelectorModel model;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double mean = 0.0;
    for (const auto& ex : training) mean += ex.features[f];
    mean /= static_cast<double>(training.size());
    double var = 0.0;
    for (const auto& ex : training) var += (ex.features[f] - mean) * (ex.features[f] - mean);
    var /= static_cast<double>(training.size());
    model.scaler_mean[f] = mean;
    model.scaler_std[f] = std::max(std::sqrt(var), kStdFloor);
  }
  for (auto& w : model.w1) w = rng.uniform(-0.5, 0.5);
  for (auto& w : model.w2) w = rng.uniform(-0.5, 0.5);

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  auto params = model.parameters();
  std::vector<double> m1(params.size(), 0.0);
  std::vector<double> m2(params.size(), 0.0);
  long step = 0;

  const auto& monitored = validation.empty() ? training : validation;
  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  SelectorModel best_model = model;
  int stale = 0;

  std::vector<std::size_t> batch_order(training.size());
  std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
  std::vector<LabeledExample> batch;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(batch_order);
    for (std::size_t start = 0; start < batch_order.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const auto end = std::min(batch_order.size(),
                                start + static_cast<std::size_t>(options.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(training[batch_order[i]]);
      const auto lg = loss_and_gradient(model, batch);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        m1[p] = kBeta1 * m1[p] + (1.0 - kBeta1) * lg.gradient[p];
        m2[p] = kBeta2 * m2[p] + (1.0 - kBeta2) * lg.gradient[p] * lg.gradient[p];
        params[p] -= options.learning_rate * (m1[p] / c1) / (std::sqrt(m2[p] / c2) + kAdamEps);
      }
      model.set_parameters(params);
    }

    result.epochs_run = epoch;
    const double loss = mean_loss(model, monitored);
    if (loss < best_loss) {
      best_loss = loss;
      best_model = model;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }

  result.model = best_model;
  result.train_loss = mean_loss(best_model, training);
  result.train_accuracy = accuracy(best_model, training);
  if (!validation.empty()) {
    result.validation_loss = mean_loss(best_model, validation);
    result.validation_accuracy = accuracy(best_model, validation);
  }
  return result;
}

nlohmann::json model_to_json(const SelectorModel& model) {
  return {
      {"format", kModelFormat},
      {"input_dim", kFeatureCount},
      {"hidden_dim", kHiddenSize},
      {"output_dim", kClassCount},
      {"activation", "relu"},
      {"classes", {"linear", "graph", "hierarchical"}},
      {"features", feature_names()},
      {"w1", model.w1},
      {"b1", model.b1},
      {"w2", model.w2},
      {"b2", model.b2},
      {"scaler_mean", model.scaler_mean},
      {"scaler_std", model.scaler_std},
  };
}

namespace {

template <std::size_t N>
void read_array(const nlohmann::json& j, const char* key, std::array<double, N>& out) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InvalidArgument(std::string("selector model lacks array '") + key + "'");
  }
  const auto& arr = j.at(key);
  if (arr.size() != N) {
    throw InvalidArgument(std::string("selector model array '") + key + "' has " +
                          std::to_string(arr.size()) + " values, expected " + std::to_string(N));
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = arr.at(i).get<double>();
}

}  // namespace

SelectorModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kModelFormat) {
    throw InvalidArgument("unsupported selector model format");
  }
  if (j.value("input_dim", 0) != static_cast<int>(kFeatureCount) ||
      j.value("hidden_dim", 0) != static_cast<int>(kHiddenSize) ||
      j.value("output_dim", 0) != static_cast<int>(kClassCount)) {
    throw InvalidArgument("selector model shape must be 12x4x3");
  }
  SelectorModel m;
  read_array(j, "w1", m.w1);
  read_array(j, "b1", m.b1);
  read_array(j, "w2", m.w2);
  read_array(j, "b2", m.b2);
  read_array(j, "scaler_mean", m.scaler_mean);
  read_array(j, "scaler_std", m.scaler_std);
  for (auto& s : m.scaler_std) {
    if (!(s > 0.0)) throw InvalidArgument("selector scaler_std must be positive");
  }
  return m;
}

nlohmann::json example_to_json(const LabeledExample& example) {
  nlohmann::json features = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    features[std::string(feature_names()[i])] = example.features[i];
  }
  nlohmann::json j = {
      {"features", features},
      {"label", to_string(example.label)},
      {"rewards", example.rewards},
  };
  if (!example.source.empty()) j["source"] = example.source;
  return j;
}

LabeledExample example_from_json(const nlohmann::json& j) {
  LabeledExample ex;
  const auto& features = j.at("features");
  if (features.is_array()) {
    if (features.size() != kFeatureCount) throw DimensionMismatch(kFeatureCount, features.size());
    for (std::size_t i = 0; i < kFeatureCount; ++i) ex.features[i] = features.at(i).get<double>();
  } else {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      ex.features[i] = features.at(std::string(feature_names()[i])).get<double>();
    }
  }
  for (double v : ex.features) {
    if (!std::isfinite(v)) throw InvalidArgument("feature values must be finite");
  }
  ex.label = structure_from_string(j.at("label").get<std::string>());
  if (j.contains("rewards")) {
    const auto& r = j.at("rewards");
    if (r.size() != kClassCount) throw DimensionMismatch(kClassCount, r.size());
    for (std::size_t i = 0; i < kClassCount; ++i) ex.rewards[i] = r.at(i).get<double>();
  }
  ex.source = j.value("source", std::string());
  return ex;
}

}  // namespace fluxmem::selector

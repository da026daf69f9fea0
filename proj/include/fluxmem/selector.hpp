#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluxmem/core.hpp"
#include "fluxmem/extraction.hpp"

namespace fluxmem::selector {

inline constexpr std::size_t kFeatureCount = 12;
inline constexpr std::size_t kHiddenSize = 4;
inline constexpr std::size_t kClassCount = 3;

/// Conversation-level features in fixed order.
enum Feature : std::size_t {
  kPageCount,
  kAvgPageLength,
  kEntityDensity,
  kRelationIndicators,
  kTopicDiversity,
  kTopicTransitions,
  kIsQnaPattern,
  kIsDecisionTree,
  kIsEntityCentric,
  kTimeSpan,
  kTemporalDensity,
  kSemanticComplexity,
};

using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string_view, kFeatureCount>& feature_names();

/// Fixed thresholds and lexicons behind the boolean and count features.
struct FeatureRules {
  double topic_join_threshold = 0.5;
  double qna_fraction = 0.7;
  int decision_run = 3;
  double entity_centric_fraction = 0.5;
};

const std::vector<std::string>& relational_cues();
const std::vector<std::string>& conditional_cues();

/// Throws InvalidArgument on an empty window.
FeatureVector extract_features(std::span<const Page> window, const Extractor& extractor,
                               const FeatureRules& rules = {});

/// 12 -> 4 (ReLU) -> 3 softmax classifier with its input standardizer.
struct SelectorModel {
  std::array<double, kHiddenSize * kFeatureCount> w1{};  // row-major 4x12
  std::array<double, kHiddenSize> b1{};
  std::array<double, kClassCount * kHiddenSize> w2{};  // row-major 3x4
  std::array<double, kClassCount> b2{};
  std::array<double, kFeatureCount> scaler_mean{};
  std::array<double, kFeatureCount> scaler_std = filled_ones();

  static constexpr std::size_t kParamCount =
      kHiddenSize * kFeatureCount + kHiddenSize + kClassCount * kHiddenSize + kClassCount;

  /// Trainable parameters in the order w1, b1, w2, b2.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

 private:
  static std::array<double, kFeatureCount> filled_ones() {
    std::array<double, kFeatureCount> a{};
    a.fill(1.0);
    return a;
  }
};

inline constexpr double kStdFloor = 1e-8;

std::array<double, kClassCount> forward(const SelectorModel& model, const FeatureVector& features);

/// Argmax of forward over the structures not in `disabled`; ties go Linear < Graph < Hierarchical.
StructureKind select_structure(const SelectorModel& model, const FeatureVector& features,
                               std::span<const StructureKind> disabled = {});

/// Index of the largest value; ties to the lowest index.
std::size_t argmax(std::span<const double> values);

double compute_reward(double judge_score, double mem_score, double lambda_q, double lambda_m);

struct LabeledExample {
  FeatureVector features{};
  StructureKind label = StructureKind::Linear;
  std::array<double, kClassCount> rewards{};
  std::string source;  // case id the example came from, informational
};

/// Mean cross-entropy of the batch and its gradient with respect to parameters().
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

LossGradient loss_and_gradient(const SelectorModel& model,
                               std::span<const LabeledExample> batch);

double mean_loss(const SelectorModel& model, std::span<const LabeledExample> examples);
double accuracy(const SelectorModel& model, std::span<const LabeledExample> examples);

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 1e-2;
  int batch_size = 16;
  std::uint64_t seed = 42;
  double validation_fraction = 0.1;
  int patience = 20;
};

struct TrainResult {
  SelectorModel model;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> validation_loss;
  std::optional<double> validation_accuracy;
  int epochs_run = 0;
  int best_epoch = 0;
};

/// Fits the standardizer, then minimizes mean cross-entropy with Adam on mini-batches.
/// Keeps the parameters of the best monitored epoch (held-out loss, or training loss when
/// the split leaves no held-out examples). Throws InvalidArgument on an empty dataset.
TrainResult train(std::span<const LabeledExample> dataset, const TrainOptions& options = {});

inline constexpr std::string_view kModelFormat = "fluxmem-selector/1";

nlohmann::json model_to_json(const SelectorModel& model);
/// Rejects unknown formats and mismatched shapes with InvalidArgument.
SelectorModel model_from_json(const nlohmann::json& j);

nlohmann::json example_to_json(const LabeledExample& example);
LabeledExample example_from_json(const nlohmann::json& j);

}  // namespace fluxmem::selector

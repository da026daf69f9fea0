#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluxmem/engine.hpp"
#include "fluxmem/selector.hpp"

namespace fluxmem::evalkit {

// ---- metrics --------------------------------------------------------------------------

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double token_f1(std::string_view prediction, std::string_view gold);
double bleu1(std::string_view candidate, std::string_view reference);
/// n in {1, 2}; throws InvalidArgument otherwise.
Prf rouge_n(std::string_view candidate, std::string_view reference, int n);
Prf rouge_l(std::string_view candidate, std::string_view reference);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
/// Exact match after trimming and lowercasing. Throws InvalidArgument on empty or
/// mismatched inputs.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);
/// |retrieved ∩ gold| / |gold|, 0 when gold is empty.
double mem_reward(std::span<const std::string> retrieved_page_ids,
                  std::span<const std::string> gold_evidence_ids);

// ---- cases ----------------------------------------------------------------------------

struct Turn {
  std::string speaker;
  std::string text;
  Timestamp timestamp = 0;
};

struct BenchmarkCase {
  std::string id;
  std::vector<std::vector<Turn>> conversation;  // sessions of turns
  std::string question;
  std::string gold_answer;
  std::vector<std::string> gold_evidence_ids;
  std::string category;
  std::optional<std::vector<std::string>> choices;
};

/// Validates one case; `line` is used in error messages. Throws ParseError.
BenchmarkCase case_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json case_to_json(const BenchmarkCase& c);
/// One case per non-blank line. Throws ParseError naming the offending line.
std::vector<BenchmarkCase> load_cases(const std::filesystem::path& path);
void save_cases(const std::filesystem::path& path, std::span<const BenchmarkCase> cases);

struct PageSpec {
  std::string id;
  std::string user_text;
  std::string agent_text;
  Timestamp timestamp = 0;
};

/// Splits a conversation into pages: a page opens at every turn of the case's first speaker
/// and collects the following turns of anyone else as agent text. Ids are "D<session>:<page>",
/// both 1-based.
std::vector<PageSpec> conversation_pages(const BenchmarkCase& c);

// ---- replay ---------------------------------------------------------------------------

enum class ReplayMode {
  Full,
  FixedLinear,
  FixedGraph,
  FixedHier,
  NoBmm,
  AblateLinear,
  AblateGraph,
  AblateHier,
};

std::string_view to_string(ReplayMode mode);
/// Throws InvalidArgument for an unknown name.
ReplayMode replay_mode_from_string(std::string_view name);
const std::vector<ReplayMode>& all_replay_modes();

/// The configuration a mode runs with.
EngineConfig config_for_mode(const EngineConfig& base, ReplayMode mode);

struct ReplaySetup {
  EngineConfig config;
  Providers providers;
  std::optional<selector::SelectorModel> model;
  std::uint64_t seed = 42;
};

struct CaseResult {
  std::string id;
  std::string category;
  std::string answer;
  std::optional<std::string> error;
  double f1 = 0.0;
  double bleu1 = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
  std::optional<double> accuracy;
  std::optional<double> mem_reward;
  std::vector<std::string> retrieved_ids;
  std::map<std::string, int> structures;  // session count per structure at question time
};

struct MetricMeans {
  std::size_t cases = 0;   // scored cases (errors excluded)
  std::size_t errors = 0;
  double f1 = 0.0;
  double bleu1 = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
  std::size_t accuracy_cases = 0;
  double accuracy = 0.0;
  std::size_t mem_cases = 0;
  double mem_reward = 0.0;
};

inline constexpr std::string_view kReportSchema = "fluxmem-report/1";

struct EvalReport {
  std::string mode;
  std::uint64_t seed = 42;
  std::string config_fingerprint;
  std::vector<CaseResult> cases;  // sorted by id
  std::map<std::string, MetricMeans> categories;
  MetricMeans overall;
};

/// Runs one case end to end on a fresh engine.
CaseResult run_case(const BenchmarkCase& c, const EngineConfig& config, const ReplaySetup& setup);

/// Replays every case under `mode`. Case failures are recorded, not thrown.
EvalReport replay(std::span<const BenchmarkCase> cases, const ReplaySetup& setup,
                  ReplayMode mode);

/// Aggregates per-case rows into category and overall means.
void summarize(EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);
/// Fixed-width text table: one row per category plus the overall row.
std::string format_table(const EvalReport& report);

// ---- labeling -------------------------------------------------------------------------

/// Features of the last selector-window pages of the case's conversation.
selector::FeatureVector case_features(const BenchmarkCase& c, const EngineConfig& config,
                                      const Providers& providers);

/// One example per case: run the pipeline once per forced structure, reward each run with
/// lambda_q * token_f1 + lambda_m * mem_reward, and label with the best structure (ties:
/// Linear < Graph < Hierarchical). Throws when a run fails.
std::vector<selector::LabeledExample> label_dataset(std::span<const BenchmarkCase> cases,
                                                    const ReplaySetup& setup);

}  // namespace fluxmem::evalkit

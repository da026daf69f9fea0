#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluxmem/error.hpp"

namespace fluxmem {

using Timestamp = std::int64_t;  // seconds since epoch
using Embedding = std::vector<double>;

enum class StructureKind : int { Linear = 0, Graph = 1, Hierarchical = 2 };

inline constexpr std::array<StructureKind, 3> kAllStructures = {
    StructureKind::Linear, StructureKind::Graph, StructureKind::Hierarchical};

std::string_view to_string(StructureKind kind);
StructureKind structure_from_string(std::string_view name);

/// One user/agent exchange.
struct Page {
  std::string id;
  std::string user_text;
  std::string agent_text;
  Timestamp timestamp = 0;
  Embedding embedding;
  Timestamp last_access = 0;
  std::optional<std::string> continuity_link;

  /// user_text + " " + agent_text, the string that gets embedded and indexed.
  std::string text() const;
};

struct StimConfig {
  int capacity = 4;
};

struct MtemConfig {
  int capacity = 2000;
  std::array<double, 3> utility_weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  int max_session_pages = 32;  // normalizer for interaction intensity
  int candidate_cap = 64;      // most recently updated sessions considered by the gate
  double consolidation_utility = 0.6;
  int summary_window = 8;
  double hier_join_threshold = 0.5;
  int hier_top_topics = 2;
};

struct LtsmConfig {
  int capacity = 100;
  double tau_u = 0.2;
  double tau_r = 0.2;
  double tau_c = 0.0;
  double dedup_cosine = 0.9;
};

enum class GateMode { Bmm, CosineThreshold };

struct GateConfig {
  GateMode mode = GateMode::Bmm;
  double threshold = 0.5;  // posterior threshold
  int min_keep = 1;
  int em_iters = 50;
  double epsilon = 1e-3;
  double new_session_floor = 0.15;
  double cosine_threshold = 0.5;  // only used by GateMode::CosineThreshold
};

struct SelectorConfig {
  double lambda_q = 0.7;
  double lambda_m = 0.3;
  int window = 8;        // recent pages fed to feature extraction
  int reeval_every = 8;  // re-select structure after this many appended pages
  std::optional<StructureKind> forced;
  std::vector<StructureKind> disabled;
};

struct RetrievalConfig {
  int rrf_k = 60;
  int top_k = 5;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  int fusion_depth = 20;  // per-leg list length fed into rank fusion
};

struct EngineConfig {
  StimConfig stim;
  MtemConfig mtem;
  LtsmConfig ltsm;
  GateConfig gate;
  SelectorConfig selector;
  RetrievalConfig retrieval;
  int embedding_dim = 384;
  double recency_half_life = 7.0 * 24.0 * 3600.0;  // seconds

  /// Throws InvalidArgument naming the first violated constraint.
  void validate() const;
};

/// Text to vector. Implementations must be deterministic for a fixed configuration.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

/// Seed of the hashing embedder. Changing it invalidates every stored snapshot.
inline constexpr std::uint64_t kHashEmbedderSeed = 0x5f3759df9e3779b9ULL;

/// Bag-of-tokens feature hashing into `dimension` buckets, L2-normalized.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 384) : dimension_(dimension) {}

  Embedding embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

/// OpenAI-compatible /embeddings endpoint.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string url, std::string api_key, std::size_t dimension, std::string model = {});

  Embedding embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::string url_;
  std::string api_key_;
  std::size_t dimension_;
  std::string model_;
};

/// FLUXMEM_EMBED_URL / FLUXMEM_EMBED_KEY select HttpEmbedder; otherwise HashEmbedder.
std::unique_ptr<Embedder> make_embedder_from_env(std::size_t dimension);

/// Lowercase, split on non-alphanumerics, drop empties. Shared by every text routine.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

/// Cosine similarity; 0 when either side has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

double l2_norm(std::span<const double> v);
void normalize_in_place(Embedding& v);

Page make_page(std::string id, std::string user_text, std::string agent_text, Timestamp timestamp,
               const Embedder& embedder);

}  // namespace fluxmem

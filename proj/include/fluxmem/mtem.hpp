#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fluxmem/bmm.hpp"
#include "fluxmem/core.hpp"
#include "fluxmem/extraction.hpp"

namespace fluxmem {

struct LinearIndex {
  std::vector<std::string> page_ids;  // chronological
};

struct GraphEdge {
  int count = 0;
  std::optional<std::string> label;
};

/// Entity co-occurrence graph of one session. Edge keys are ordered (smaller, larger).
struct GraphIndex {
  std::map<std::string, std::set<std::string>> nodes;  // entity -> page ids
  std::map<std::pair<std::string, std::string>, GraphEdge> edges;

  /// `entities` plus every entity one edge away from any of them.
  std::set<std::string> expand(std::span<const std::string> entities) const;
};

struct Topic {
  std::string label;
  Embedding embedding;  // normalized mean of member embeddings
  std::vector<std::string> page_ids;
  Embedding member_sum;  // running sum backing `embedding`
};

struct HierIndex {
  std::vector<Topic> topics;
};

using StructureIndex = std::variant<LinearIndex, GraphIndex, HierIndex>;

StructureKind kind_of(const StructureIndex& index);

struct EpisodicSession {
  std::string id;
  std::vector<Page> pages;  // chronological
  std::string summary;
  Embedding summary_embedding;
  StructureKind structure_kind = StructureKind::Linear;
  StructureIndex index;
  int access_count = 0;  // merges into this session
  Timestamp created_at = 0;
  Timestamp updated_at = 0;
  int pages_since_selection = 0;
  std::size_t consolidated_pages = 0;  // page count at the last consolidation

  const Page* find_page(std::string_view page_id) const;
};

/// Greedy sequential topic clustering: each embedding joins the first-best topic whose
/// centroid reaches `join_threshold`, else opens a new topic. Returns member indices per topic.
std::vector<std::vector<std::size_t>> cluster_topics(std::span<const Embedding> embeddings,
                                                     double join_threshold);

/// Builds the index of `kind` over every page of `session` from scratch.
StructureIndex build_structure_index(const EpisodicSession& session, StructureKind kind,
                                     const Extractor& extractor, double hier_join_threshold = 0.5);

/// Extends `index` with one more page (the newest page of `session`). Folding this over the
/// pages in order yields exactly build_structure_index.
void append_to_index(StructureIndex& index, const EpisodicSession& session, const Page& page,
                     const Extractor& extractor, double hier_join_threshold = 0.5);

struct UtilityInputs {
  std::array<double, 3> weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  int max_session_pages = 32;
  double half_life = 7.0 * 24.0 * 3600.0;
  Timestamp now = 0;
};

/// w1 * c/(1+c) + w2 * min(1, pages/max_pages) + w3 * exp(-(now - updated_at)/half_life).
double utility(const EpisodicSession& session, const UtilityInputs& in);

struct ScoredPage {
  Page page;
  std::string session_id;
  StructureKind structure = StructureKind::Linear;
  double score = 0.0;
};

struct StructureSelection {
  std::string session_id;
  StructureKind kind = StructureKind::Linear;
  bool at_creation = true;
  bool changed = false;
};

struct IntegrationRecord {
  std::string page_id;
  std::vector<std::string> candidate_ids;  // sessions scored by the gate, in score order given
  std::vector<double> scores;
  bmm::GateDecision decision;
  std::string session_id;  // session the page ended up in
  bool created_session = false;
  std::optional<StructureSelection> selection;
};

struct MtemPruneResult {
  std::vector<EpisodicSession> removed;
  /// Ids of sessions (removed or retained) whose utility reaches the consolidation threshold.
  std::vector<std::string> consolidation_candidates;
};

/// Chooses the structure of a session at creation and at re-evaluation points.
using StructureChooser = std::function<StructureKind(const EpisodicSession&)>;

class MtemStore {
 public:
  MtemStore() = default;
  MtemStore(MtemConfig config, double half_life) : config_(config), half_life_(half_life) {}

  struct IntegrationContext {
    const Embedder& embedder;
    const Extractor& extractor;
    const GateConfig& gate;
    StructureChooser choose_structure;
    int reeval_every = 8;
  };

  /// Routes each incoming page (oldest first) into an existing session or a new one.
  std::vector<IntegrationRecord> integrate(std::vector<Page> incoming,
                                           const IntegrationContext& ctx);

  /// Structure-aware retrieval across all sessions. Scores are non-increasing; ties by
  /// newer timestamp, then id.
  std::vector<ScoredPage> retrieve(std::span<const double> query_embedding,
                                   std::span<const std::string> query_entities, int k,
                                   Timestamp now) const;

  /// Drops the lowest-utility sessions (ties: oldest updated_at, then id) until at capacity.
  MtemPruneResult prune(int capacity, Timestamp now);

  UtilityInputs utility_inputs(Timestamp now) const;

  /// Replaces the structure of a session and rebuilds its index.
  void restructure(std::string_view session_id, StructureKind kind, const Extractor& extractor);

  const std::vector<EpisodicSession>& sessions() const noexcept { return sessions_; }
  const EpisodicSession* find(std::string_view session_id) const;
  EpisodicSession* find_mutable(std::string_view session_id);
  std::size_t size() const noexcept { return sessions_.size(); }
  std::size_t page_count() const;
  const MtemConfig& config() const noexcept { return config_; }
  double half_life() const noexcept { return half_life_; }

  int next_session_seq() const noexcept { return next_session_seq_; }
  static MtemStore restore(MtemConfig config, double half_life,
                           std::vector<EpisodicSession> sessions, int next_session_seq);

 private:
  EpisodicSession& open_session(Page page, const IntegrationContext& ctx,
                                IntegrationRecord& record);
  void merge_into(EpisodicSession& session, Page page, const IntegrationContext& ctx,
                  IntegrationRecord& record);
  void refresh_summary(EpisodicSession& session, const IntegrationContext& ctx) const;
  std::vector<std::size_t> gate_candidates() const;

  MtemConfig config_;
  double half_life_ = 7.0 * 24.0 * 3600.0;
  std::vector<EpisodicSession> sessions_;
  int next_session_seq_ = 1;
};

}  // namespace fluxmem

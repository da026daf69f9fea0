#pragma once

#include <span>
#include <string>
#include <vector>

#include "fluxmem/core.hpp"
#include "fluxmem/extraction.hpp"
#include "fluxmem/mtem.hpp"

namespace fluxmem {

/// A consolidated long-term memory item.
struct LtsmEntry {
  std::string id;
  FactKind kind = FactKind::UserFact;
  std::string content;
  Embedding embedding;
  int usage = 0;          // u(m)
  double recency = 1.0;   // r(m), exp-decay since last use
  double confidence = 1.0;  // c(m)
  std::string source_session_id;
  Timestamp last_used = 0;
};

struct EligibilityThresholds {
  double tau_u = 0.2;
  double tau_r = 0.2;
  double tau_c = 0.0;
};

/// u/(1+u) >= tau_u and r >= tau_r and c >= tau_c.
bool eligible(const LtsmEntry& entry, const EligibilityThresholds& thresholds);

struct ScoredEntry {
  LtsmEntry entry;
  double score = 0.0;
};

class LtsmStore {
 public:
  LtsmStore() = default;
  LtsmStore(LtsmConfig config, double half_life) : config_(config), half_life_(half_life) {}

  /// Turns a session's extracted facts into entries. A fact whose embedding is within the
  /// dedup cosine of an existing entry refreshes that entry instead of inserting.
  /// Returns the inserted or refreshed entries.
  std::vector<LtsmEntry> consolidate(const EpisodicSession& session, const Extractor& extractor,
                                     const Embedder& embedder, Timestamp now);

  /// Top-k by cosine (positive scores only). Hits get usage+1 and recency reset to 1.
  std::vector<ScoredEntry> retrieve(std::span<const double> query_embedding, int k, Timestamp now);

  /// Recomputes recency of every entry against `now`.
  void decay(Timestamp now);

  /// Over capacity: drop ineligible entries (least recent first), then the eligible entries
  /// with the smallest u/(1+u) + r + c.
  std::vector<LtsmEntry> prune(int capacity);

  const std::vector<LtsmEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const LtsmConfig& config() const noexcept { return config_; }
  EligibilityThresholds thresholds() const {
    return {config_.tau_u, config_.tau_r, config_.tau_c};
  }
  int next_entry_seq() const noexcept { return next_entry_seq_; }

  static LtsmStore restore(LtsmConfig config, double half_life, std::vector<LtsmEntry> entries,
                           int next_entry_seq);

 private:
  LtsmConfig config_;
  double half_life_ = 7.0 * 24.0 * 3600.0;
  std::vector<LtsmEntry> entries_;
  int next_entry_seq_ = 1;
};

}  // namespace fluxmem

#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluxmem/core.hpp"
#include "fluxmem/extraction.hpp"
#include "fluxmem/ltsm.hpp"
#include "fluxmem/mtem.hpp"
#include "fluxmem/retrieval.hpp"
#include "fluxmem/selector.hpp"
#include "fluxmem/stim.hpp"

namespace fluxmem {

struct Providers {
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<const Extractor> extractor;
  std::shared_ptr<const retrieval::Responder> responder;

  /// Hash embedder, rule extractor, mock responder.
  static Providers deterministic(std::size_t embedding_dim = 384);
  /// Remote providers where the environment configures them, deterministic ones elsewhere.
  static Providers from_env(std::size_t embedding_dim = 384);
};

struct LayerCounts {
  std::size_t stim = 0;
  std::size_t mtem_sessions = 0;
  std::size_t mtem_pages = 0;
  std::size_t ltsm = 0;
  std::size_t observed = 0;
  std::size_t pruned_pages = 0;  // pages that left memory with a pruned session
};

/// Everything one observation did to the memory.
struct IngestionTrace {
  std::string page_id;
  std::vector<std::string> evicted;  // page ids leaving the short-term buffer
  std::vector<IntegrationRecord> integrations;
  std::vector<std::string> pruned_sessions;
  std::vector<std::string> consolidated_sessions;
  std::vector<std::string> ltsm_touched;  // inserted or refreshed entry ids
  std::vector<std::string> ltsm_pruned;
  LayerCounts counts;
};

struct AskTrace {
  std::vector<std::string> query_entities;
  std::vector<std::string> mtem_page_ids;
  std::vector<std::string> ltsm_entry_ids;
};

struct AskResult {
  std::string answer;
  retrieval::FusedContext context;
  AskTrace trace;
};

/// One conversation's memory: short-term buffer, episodic sessions, long-term store, and the
/// structure selector, driven through observe() and ask(). Single writer.
class Engine {
 public:
  Engine(EngineConfig config, Providers providers, std::uint64_t seed = 42);

  /// Ingests one exchange with a generated page id. Throws InvalidArgument when the
  /// timestamp is negative or older than the previous one.
  IngestionTrace observe(std::string user_text, std::string agent_text, Timestamp timestamp);
  /// Same, with a caller-chosen page id. Ids must be unique across the conversation.
  IngestionTrace observe_with_id(std::string page_id, std::string user_text,
                                 std::string agent_text, Timestamp timestamp);

  /// Answers a query from fused memory. Only long-term usage counters change.
  AskResult ask(std::string_view query, std::span<const std::string> choices = {});

  /// Structure the selector would assign given the current recent window.
  StructureKind choose_structure() const;

  const EngineConfig& config() const noexcept { return config_; }
  const StimBuffer& stim() const noexcept { return stim_; }
  const MtemStore& mtem() const noexcept { return mtem_; }
  const LtsmStore& ltsm() const noexcept { return ltsm_; }
  const selector::SelectorModel& selector_model() const noexcept { return model_; }
  void set_selector_model(const selector::SelectorModel& model) { model_ = model; }
  const Providers& providers() const noexcept { return providers_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::optional<Timestamp> clock() const noexcept { return clock_; }
  LayerCounts counts() const;
  /// The last selector-window observed pages, oldest first.
  const std::deque<Page>& recent() const noexcept { return recent_; }

  /// Free-form provenance notes stored alongside snapshots (config overrides).
  std::vector<std::string>& provenance() noexcept { return provenance_; }
  const std::vector<std::string>& provenance() const noexcept { return provenance_; }

  struct State {
    StimBuffer stim;
    MtemStore mtem;
    LtsmStore ltsm;
    selector::SelectorModel model;
    std::deque<Page> recent;
    std::optional<Timestamp> clock;
    std::size_t observed = 0;
    std::size_t pruned_pages = 0;
    int page_seq = 1;
    std::vector<std::string> provenance;
  };
  static Engine restore(EngineConfig config, Providers providers, std::uint64_t seed, State state);
  int page_seq() const noexcept { return page_seq_; }

 private:
  MtemStore::IntegrationContext integration_context() const;

  EngineConfig config_;
  Providers providers_;
  std::uint64_t seed_;
  StimBuffer stim_;
  MtemStore mtem_;
  LtsmStore ltsm_;
  selector::SelectorModel model_;
  std::deque<Page> recent_;
  std::optional<Timestamp> clock_;
  std::size_t observed_ = 0;
  std::size_t pruned_pages_ = 0;
  int page_seq_ = 1;
  std::vector<std::string> provenance_;
};

}  // namespace fluxmem

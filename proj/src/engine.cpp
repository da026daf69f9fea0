#include "fluxmem/engine.hpp"

#include <algorithm>
#include <cstdio>

namespace fluxmem {

Providers Providers::deterministic(std::size_t embedding_dim) {
  return {std::make_shared<HashEmbedder>(embedding_dim), std::make_shared<RuleExtractor>(),
          std::make_shared<retrieval::MockResponder>()};
}

Providers Providers::from_env(std::size_t embedding_dim) {
  Providers p;
  p.embedder = make_embedder_from_env(embedding_dim);
  p.extractor = make_extractor_from_env();
  auto llm = llm_settings_from_env();
  if (llm.base_url.empty()) {
    p.responder = std::make_shared<retrieval::MockResponder>();
  } else {
    p.responder = std::make_shared<retrieval::HttpResponder>(std::move(llm));
  }
  return p;
}

Engine::Engine(EngineConfig config, Providers providers, std::uint64_t seed)
    : config_(std::move(config)),
      providers_(std::move(providers)),
      seed_(seed),
      stim_(config_.stim.capacity),
      mtem_(config_.mtem, config_.recency_half_life),
      ltsm_(config_.ltsm, config_.recency_half_life) {
  config_.validate();
  if (!providers_.embedder || !providers_.extractor || !providers_.responder) {
    throw InvalidArgument("engine requires an embedder, an extractor and a responder");
  }
  if (providers_.embedder->dimension() != static_cast<std::size_t>(config_.embedding_dim)) {
    throw DimensionMismatch(static_cast<std::size_t>(config_.embedding_dim),
                            providers_.embedder->dimension());
  }
}

LayerCounts Engine::counts() const {
  LayerCounts c;
  c.stim = stim_.size();
  c.mtem_sessions = mtem_.size();
  c.mtem_pages = mtem_.page_count();
  c.ltsm = ltsm_.size();
  c.observed = observed_;
  c.pruned_pages = pruned_pages_;
  return c;
}

StructureKind Engine::choose_structure() const {
  const auto& sel = config_.selector;
  if (sel.forced) return *sel.forced;
  if (recent_.empty()) {
    for (auto kind : kAllStructures) {
      if (std::find(sel.disabled.begin(), sel.disabled.end(), kind) == sel.disabled.end()) {
        return kind;
      }
    }
    throw InvalidArgument("every structure is disabled");
  }
  const std::vector<Page> window(recent_.begin(), recent_.end());
  const auto features = selector::extract_features(window, *providers_.extractor);
  return selector::select_structure(model_, features, sel.disabled);
}

MtemStore::IntegrationContext Engine::integration_context() const {
  return {*providers_.embedder, *providers_.extractor, config_.gate,
          [this](const EpisodicSession&) { return choose_structure(); },
          config_.selector.reeval_every};
}

IngestionTrace Engine::observe(std::string user_text, std::string agent_text,
                               Timestamp timestamp) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%06d", page_seq_);
  auto trace = observe_with_id(buf, std::move(user_text), std::move(agent_text), timestamp);
  ++page_seq_;
  return trace;
}

IngestionTrace Engine::observe_with_id(std::string page_id, std::string user_text,
                                       std::string agent_text, Timestamp timestamp) {
  if (clock_ && timestamp < *clock_) {
    throw InvalidArgument("timestamp " + std::to_string(timestamp) +
                          " is older than the previous observation " + std::to_string(*clock_));
  }
  if (stim_.contains(page_id)) throw InvalidArgument("duplicate page id '" + page_id + "'");
  auto page = make_page(std::move(page_id), std::move(user_text), std::move(agent_text),
                        timestamp, *providers_.embedder);
  clock_ = timestamp;
  ++observed_;

  IngestionTrace trace;
  trace.page_id = page.id;
  recent_.push_back(page);
  while (recent_.size() > static_cast<std::size_t>(std::max(config_.selector.window, 1))) {
    recent_.pop_front();
  }

  auto evicted = stim_.push(std::move(page));
  for (const auto& p : evicted) trace.evicted.push_back(p.id);
  if (!evicted.empty()) {
    trace.integrations = mtem_.integrate(std::move(evicted), integration_context());
  }

  auto pruned = mtem_.prune(config_.mtem.capacity, timestamp);
  for (const auto& s : pruned.removed) {
    trace.pruned_sessions.push_back(s.id);
    pruned_pages_ += s.pages.size();
  }
  for (const auto& id : pruned.consolidation_candidates) {
    EpisodicSession* session = mtem_.find_mutable(id);
    if (session == nullptr) {
      auto it = std::find_if(pruned.removed.begin(), pruned.removed.end(),
                             [&](const EpisodicSession& s) { return s.id == id; });
      if (it == pruned.removed.end()) continue;
      session = &*it;
    }
    if (session->pages.size() <= session->consolidated_pages) continue;
    for (const auto& entry :
         ltsm_.consolidate(*session, *providers_.extractor, *providers_.embedder, timestamp)) {
      trace.ltsm_touched.push_back(entry.id);
    }
    session->consolidated_pages = session->pages.size();
    trace.consolidated_sessions.push_back(id);
  }

  ltsm_.decay(timestamp);
  for (const auto& e : ltsm_.prune(config_.ltsm.capacity)) trace.ltsm_pruned.push_back(e.id);
  trace.counts = counts();
  return trace;
}

AskResult Engine::ask(std::string_view query, std::span<const std::string> choices) {
  AskResult result;
  const Timestamp now = clock_.value_or(0);
  result.context = retrieval::fuse_context(query, stim_, mtem_, ltsm_, *providers_.extractor,
                                           *providers_.embedder, config_.retrieval, now);
  result.answer = retrieval::answer(result.context, *providers_.responder, choices);
  result.trace.query_entities = providers_.extractor->extract_entities(query);
  for (const auto& hit : result.context.mtem_hits) result.trace.mtem_page_ids.push_back(hit.page.id);
  for (const auto& hit : result.context.ltsm_hits) {
    result.trace.ltsm_entry_ids.push_back(hit.entry.id);
  }
  return result;
}

Engine Engine::restore(EngineConfig config, Providers providers, std::uint64_t seed,
                       State state) {
  Engine engine(std::move(config), std::move(providers), seed);
  engine.stim_ = std::move(state.stim);
  engine.mtem_ = std::move(state.mtem);
  engine.ltsm_ = std::move(state.ltsm);
  engine.model_ = state.model;
  engine.recent_ = std::move(state.recent);
  engine.clock_ = state.clock;
  engine.observed_ = state.observed;
  engine.pruned_pages_ = state.pruned_pages;
  engine.page_seq_ = state.page_seq;
  engine.provenance_ = std::move(state.provenance);
  return engine;
}

}  // namespace fluxmem

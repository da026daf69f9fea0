#include "fluxmem/mtem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace fluxmem {

std::set<std::string> GraphIndex::expand(std::span<const std::string> entities) const {
  std::set<std::string> out(entities.begin(), entities.end());
  for (const auto& [key, edge] : edges) {
    const bool has_first = std::find(entities.begin(), entities.end(), key.first) != entities.end();
    const bool has_second =
        std::find(entities.begin(), entities.end(), key.second) != entities.end();
    if (has_first) out.insert(key.second);
    if (has_second) out.insert(key.first);
  }
  return out;
}

StructureKind kind_of(const StructureIndex& index) {
  return static_cast<StructureKind>(index.index());
}

const Page* EpisodicSession::find_page(std::string_view page_id) const {
  // Newest first: lookups almost always target recent pages.
  for (auto it = pages.rbegin(); it != pages.rend(); ++it) {
    if (it->id == page_id) return &*it;
  }
  return nullptr;
}

namespace {

// Topic labels are computed from the most recent members only.
constexpr std::ptrdiff_t kTopicLabelWindow = 8;

// Index of the topic `embedding` should join, or nullopt to open a new one.
std::optional<std::size_t> best_topic(std::span<const Embedding> centroids,
                                      std::span<const double> embedding, double join_threshold) {
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t t = 0; t < centroids.size(); ++t) {
    const double c = cosine(embedding, centroids[t]);
    if (c >= join_threshold && (!best || c > best_score)) {
      best = t;
      best_score = c;
    }
  }
  return best;
}

void add_into(Embedding& sum, std::span<const double> v) {
  if (sum.empty()) sum.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
}

Embedding normalized(Embedding v) {
  normalize_in_place(v);
  return v;
}

std::vector<Page> pages_by_id(const EpisodicSession& session, const std::vector<std::string>& ids,
                              const Page& incoming) {
  std::vector<Page> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    if (id == incoming.id) {
      out.push_back(incoming);
    } else if (const Page* p = session.find_page(id)) {
      out.push_back(*p);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_topics(std::span<const Embedding> embeddings,
                                                     double join_threshold) {
  std::vector<std::vector<std::size_t>> members;
  std::vector<Embedding> sums;
  std::vector<Embedding> centroids;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto t = best_topic(centroids, embeddings[i], join_threshold);
    if (!t) {
      members.push_back({i});
      sums.push_back(embeddings[i]);
      centroids.push_back(normalized(embeddings[i]));
    } else {
      members[*t].push_back(i);
      add_into(sums[*t], embeddings[i]);
      centroids[*t] = normalized(sums[*t]);
    }
  }
  return members;
}

void append_to_index(StructureIndex& index, const EpisodicSession& session, const Page& page,
                     const Extractor& extractor, double hier_join_threshold) {
  std::visit(
      [&](auto& idx) {
        using T = std::decay_t<decltype(idx)>;
        if constexpr (std::is_same_v<T, LinearIndex>) {
          // Pages arrive in timestamp order; keep the insertion stable for equal timestamps.
          const Page* last =
              idx.page_ids.empty() ? nullptr : session.find_page(idx.page_ids.back());
          if (last == nullptr || last->timestamp <= page.timestamp) {
            idx.page_ids.push_back(page.id);
            return;
          }
          auto pos = std::upper_bound(
              idx.page_ids.begin(), idx.page_ids.end(), page.timestamp,
              [&](Timestamp ts, const std::string& id) {
                const Page* other = id == page.id ? &page : session.find_page(id);
                return other != nullptr && ts < other->timestamp;
              });
          idx.page_ids.insert(pos, page.id);
        } else if constexpr (std::is_same_v<T, GraphIndex>) {
          const auto text = page.text();
          const auto entities = extractor.extract_entities(text);
          for (const auto& e : entities) idx.nodes[e].insert(page.id);
          for (std::size_t i = 0; i < entities.size(); ++i) {
            for (std::size_t j = i + 1; j < entities.size(); ++j) {
              idx.edges[{entities[i], entities[j]}].count += 1;
            }
          }
          for (const auto& rel : extractor.extract_relations(text)) {
            if (rel.head == rel.tail) continue;
            idx.nodes[rel.head];
            idx.nodes[rel.tail];
            auto key = std::minmax(rel.head, rel.tail);
            auto& edge = idx.edges[{key.first, key.second}];
            if (edge.count == 0) edge.count = 1;
            edge.label = rel.relation;
          }
        } else {
          std::vector<Embedding> centroids;
          centroids.reserve(idx.topics.size());
          for (const auto& t : idx.topics) centroids.push_back(t.embedding);
          const auto target = best_topic(centroids, page.embedding, hier_join_threshold);
          Topic* topic = nullptr;
          if (!target) {
            idx.topics.push_back({});
            topic = &idx.topics.back();
          } else {
            topic = &idx.topics[*target];
          }
          topic->page_ids.push_back(page.id);
          add_into(topic->member_sum, page.embedding);
          topic->embedding = normalized(topic->member_sum);
          const auto label_from = topic->page_ids.size() > kTopicLabelWindow
                                      ? topic->page_ids.end() - kTopicLabelWindow
                                      : topic->page_ids.begin();
          const auto members = pages_by_id(
              session, std::vector<std::string>(label_from, topic->page_ids.end()), page);
          topic->label = extractor.topic_label(members);
        }
      },
      index);
}

StructureIndex build_structure_index(const EpisodicSession& session, StructureKind kind,
                                     const Extractor& extractor, double hier_join_threshold) {
  if (session.pages.empty()) throw InvalidArgument("cannot index an empty session");
  StructureIndex index;
  switch (kind) {
    case StructureKind::Linear:
      index = LinearIndex{};
      break;
    case StructureKind::Graph:
      index = GraphIndex{};
      break;
    case StructureKind::Hierarchical:
      index = HierIndex{};
      break;
  }
  for (const auto& page : session.pages) {
    append_to_index(index, session, page, extractor, hier_join_threshold);
  }
  return index;
}

double utility(const EpisodicSession& session, const UtilityInputs& in) {
  const double c = static_cast<double>(session.access_count);
  const double access = c / (1.0 + c);
  const double intensity = std::min(
      1.0, static_cast<double>(session.pages.size()) / static_cast<double>(in.max_session_pages));
  const double age = std::max<double>(0.0, static_cast<double>(in.now - session.updated_at));
  const double recency = std::exp(-age / in.half_life);
  const double u =
      in.weights[0] * access + in.weights[1] * intensity + in.weights[2] * recency;
  return std::clamp(u, 0.0, 1.0);
}

UtilityInputs MtemStore::utility_inputs(Timestamp now) const {
  return {config_.utility_weights, config_.max_session_pages, half_life_, now};
}

const EpisodicSession* MtemStore::find(std::string_view session_id) const {
  for (const auto& s : sessions_) {
    if (s.id == session_id) return &s;
  }
  return nullptr;
}

EpisodicSession* MtemStore::find_mutable(std::string_view session_id) {
  for (auto& s : sessions_) {
    if (s.id == session_id) return &s;
  }
  return nullptr;
}

std::size_t MtemStore::page_count() const {
  std::size_t n = 0;
  for (const auto& s : sessions_) n += s.pages.size();
  return n;
}

std::vector<std::size_t> MtemStore::gate_candidates() const {
  std::vector<std::size_t> order(sessions_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sessions_[a].updated_at != sessions_[b].updated_at) {
      return sessions_[a].updated_at > sessions_[b].updated_at;
    }
    return sessions_[a].id < sessions_[b].id;
  });
  if (order.size() > static_cast<std::size_t>(config_.candidate_cap)) {
    order.resize(static_cast<std::size_t>(config_.candidate_cap));
  }
  return order;
}

void MtemStore::refresh_summary(EpisodicSession& session, const IntegrationContext& ctx) const {
  const auto window = std::min<std::size_t>(session.pages.size(),
                                            static_cast<std::size_t>(config_.summary_window));
  std::span<const Page> recent(session.pages.data() + (session.pages.size() - window), window);
  session.summary = ctx.extractor.summarize(recent);
  session.summary_embedding = ctx.embedder.embed(session.summary);
}

EpisodicSession& MtemStore::open_session(Page page, const IntegrationContext& ctx,
                                         IntegrationRecord& record) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06d", next_session_seq_++);
  EpisodicSession session;
  session.id = buf;
  session.created_at = page.timestamp;
  session.updated_at = page.timestamp;
  page.continuity_link.reset();
  session.pages.push_back(std::move(page));
  refresh_summary(session, ctx);

  const StructureKind kind =
      ctx.choose_structure ? ctx.choose_structure(session) : StructureKind::Linear;
  session.structure_kind = kind;
  session.index = build_structure_index(session, kind, ctx.extractor, config_.hier_join_threshold);
  record.selection = StructureSelection{session.id, kind, true, false};
  record.created_session = true;
  record.session_id = session.id;
  sessions_.push_back(std::move(session));
  return sessions_.back();
}

void MtemStore::merge_into(EpisodicSession& session, Page page, const IntegrationContext& ctx,
                           IntegrationRecord& record) {
  page.continuity_link = session.pages.back().id;
  session.updated_at = std::max(session.updated_at, page.timestamp);
  session.access_count += 1;
  session.pages.push_back(std::move(page));
  append_to_index(session.index, session, session.pages.back(), ctx.extractor,
                  config_.hier_join_threshold);
  refresh_summary(session, ctx);
  record.session_id = session.id;

  session.pages_since_selection += 1;
  if (ctx.choose_structure && session.pages_since_selection >= ctx.reeval_every) {
    session.pages_since_selection = 0;
    const StructureKind kind = ctx.choose_structure(session);
    const bool changed = kind != session.structure_kind;
    if (changed) {
      session.structure_kind = kind;
      session.index =
          build_structure_index(session, kind, ctx.extractor, config_.hier_join_threshold);
    }
    record.selection = StructureSelection{session.id, kind, false, changed};
  }
}

std::vector<IntegrationRecord> MtemStore::integrate(std::vector<Page> incoming,
                                                    const IntegrationContext& ctx) {
  std::stable_sort(incoming.begin(), incoming.end(),
                   [](const Page& a, const Page& b) { return a.timestamp < b.timestamp; });
  std::vector<IntegrationRecord> records;
  records.reserve(incoming.size());
  for (auto& page : incoming) {
    IntegrationRecord record;
    record.page_id = page.id;
    const auto candidates = gate_candidates();
    for (std::size_t idx : candidates) {
      record.candidate_ids.push_back(sessions_[idx].id);
      record.scores.push_back(cosine(page.embedding, sessions_[idx].summary_embedding));
    }
    if (ctx.gate.mode == GateMode::Bmm) {
      record.decision = bmm::decide_fusion(
          record.scores, {ctx.gate.threshold, ctx.gate.min_keep, ctx.gate.em_iters,
                          ctx.gate.epsilon, ctx.gate.new_session_floor});
    } else {
      record.decision = bmm::decide_by_threshold(record.scores, ctx.gate.cosine_threshold);
    }

    if (record.decision.merge_target) {
      auto& target = sessions_[candidates[static_cast<std::size_t>(*record.decision.merge_target)]];
      merge_into(target, std::move(page), ctx, record);
    } else {
      open_session(std::move(page), ctx, record);
    }
    records.push_back(std::move(record));
  }
  return records;
}

void MtemStore::restructure(std::string_view session_id, StructureKind kind,
                            const Extractor& extractor) {
  auto* session = find_mutable(session_id);
  if (session == nullptr) {
    throw InvalidArgument("unknown session '" + std::string(session_id) + "'");
  }
  session->structure_kind = kind;
  session->index = build_structure_index(*session, kind, extractor, config_.hier_join_threshold);
}

std::vector<ScoredPage> MtemStore::retrieve(std::span<const double> query_embedding,
                                            std::span<const std::string> query_entities, int k,
                                            Timestamp now) const {
  if (k < 1) throw InvalidArgument("retrieve requires k >= 1");
  struct Candidate {
    const Page* page;
    const EpisodicSession* session;
    double score;
  };
  std::vector<Candidate> pool;

  for (const auto& session : sessions_) {
    std::visit(
        [&](const auto& idx) {
          using T = std::decay_t<decltype(idx)>;
          if constexpr (std::is_same_v<T, LinearIndex>) {
            for (const auto& page : session.pages) {
              const double age =
                  std::max<double>(0.0, static_cast<double>(now - page.timestamp));
              const double score =
                  cosine(query_embedding, page.embedding) * std::exp(-age / half_life_);
              pool.push_back({&page, &session, score});
            }
          } else if constexpr (std::is_same_v<T, GraphIndex>) {
            const auto expanded = idx.expand(query_entities);
            std::unordered_map<std::string, int> matched;
            for (const auto& entity : expanded) {
              auto it = idx.nodes.find(entity);
              if (it == idx.nodes.end()) continue;
              for (const auto& pid : it->second) matched[pid] += 1;
            }
            const double denom = std::max<double>(1.0, static_cast<double>(expanded.size()));
            for (const auto& page : session.pages) {
              const double cos = cosine(query_embedding, page.embedding);
              auto it = matched.find(page.id);
              const double score =
                  it == matched.end() ? cos : 0.5 * cos + 0.5 * (it->second / denom);
              pool.push_back({&page, &session, score});
            }
          } else {
            std::unordered_map<std::string_view, const Page*> by_id;
            for (const auto& page : session.pages) by_id.emplace(page.id, &page);
            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t t = 0; t < idx.topics.size(); ++t) {
              ranked.emplace_back(cosine(query_embedding, idx.topics[t].embedding), t);
            }
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            const auto keep =
                std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config_.hier_top_topics));
            for (std::size_t r = 0; r < keep; ++r) {
              for (const auto& pid : idx.topics[ranked[r].second].page_ids) {
                auto found = by_id.find(pid);
                if (found == by_id.end()) continue;
                const Page* page = found->second;
                pool.push_back({page, &session, cosine(query_embedding, page->embedding)});
              }
            }
          }
        },
        session.index);
  }

  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.page->timestamp != b.page->timestamp) return a.page->timestamp > b.page->timestamp;
    return a.page->id < b.page->id;
  });
  if (pool.size() > static_cast<std::size_t>(k)) pool.resize(static_cast<std::size_t>(k));

  std::vector<ScoredPage> out;
  out.reserve(pool.size());
  for (const auto& c : pool) {
    out.push_back({*c.page, c.session->id, c.session->structure_kind, c.score});
  }
  return out;
}

MtemPruneResult MtemStore::prune(int capacity, Timestamp now) {
  MtemPruneResult result;
  const auto inputs = utility_inputs(now);
  std::vector<double> utilities;
  utilities.reserve(sessions_.size());
  for (const auto& s : sessions_) utilities.push_back(utility(s, inputs));

  std::vector<bool> drop(sessions_.size(), false);
  const auto cap = static_cast<std::size_t>(std::max(capacity, 0));
  if (sessions_.size() > cap) {
    std::vector<std::size_t> order(sessions_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (utilities[a] != utilities[b]) return utilities[a] < utilities[b];
      if (sessions_[a].updated_at != sessions_[b].updated_at) {
        return sessions_[a].updated_at < sessions_[b].updated_at;
      }
      return sessions_[a].id < sessions_[b].id;
    });
    for (std::size_t i = 0; i < sessions_.size() - cap; ++i) drop[order[i]] = true;
  }

  std::vector<EpisodicSession> kept;
  kept.reserve(std::min(sessions_.size(), cap));
  for (std::size_t i = 0; i < sessions_.size(); ++i) {
    if (utilities[i] >= config_.consolidation_utility) {
      result.consolidation_candidates.push_back(sessions_[i].id);
    }
    if (drop[i]) {
      result.removed.push_back(std::move(sessions_[i]));
    } else {
      kept.push_back(std::move(sessions_[i]));
    }
  }
  sessions_ = std::move(kept);
  return result;
}

MtemStore MtemStore::restore(MtemConfig config, double half_life,
                             std::vector<EpisodicSession> sessions, int next_session_seq) {
  MtemStore store(config, half_life);
  store.sessions_ = std::move(sessions);
  store.next_session_seq_ = next_session_seq;
  return store;
}

}  // namespace fluxmem

#include "fluxmem/ltsm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace fluxmem {

namespace {

double normalized_usage(int usage) {
  const double u = static_cast<double>(std::max(usage, 0));
  return u / (1.0 + u);
}

}  // namespace

bool eligible(const LtsmEntry& entry, const EligibilityThresholds& t) {
  return normalized_usage(entry.usage) >= t.tau_u && entry.recency >= t.tau_r &&
         entry.confidence >= t.tau_c;
}

std::vector<LtsmEntry> LtsmStore::consolidate(const EpisodicSession& session,
                                              const Extractor& extractor,
                                              const Embedder& embedder, Timestamp now) {
  std::vector<LtsmEntry> touched;
  for (auto& fact : extractor.extract_facts(session.pages, session.summary)) {
    if (fact.content.empty()) continue;
    auto embedding = embedder.embed(fact.content);

    LtsmEntry* duplicate = nullptr;
    double best = config_.dedup_cosine;
    for (auto& e : entries_) {
      const double c = cosine(embedding, e.embedding);
      if (c >= best) {
        best = c;
        duplicate = &e;
      }
    }
    if (duplicate != nullptr) {
      duplicate->confidence = std::max(duplicate->confidence, fact.confidence);
      duplicate->recency = 1.0;
      duplicate->last_used = std::max(duplicate->last_used, now);
      touched.push_back(*duplicate);
      continue;
    }

    LtsmEntry entry;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "m%06d", next_entry_seq_++);
    entry.id = buf;
    entry.kind = fact.kind;
    entry.content = std::move(fact.content);
    entry.embedding = std::move(embedding);
    entry.usage = 0;
    entry.recency = 1.0;
    entry.confidence = std::clamp(fact.confidence, 0.0, 1.0);
    entry.source_session_id = session.id;
    entry.last_used = now;
    touched.push_back(entry);
    entries_.push_back(std::move(entry));
  }
  return touched;
}

std::vector<ScoredEntry> LtsmStore::retrieve(std::span<const double> query_embedding, int k,
                                             Timestamp now) {
  if (k < 1) throw InvalidArgument("retrieve requires k >= 1");
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double c = cosine(query_embedding, entries_[i].embedding);
    if (c > 0.0) ranked.emplace_back(c, i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return entries_[a.second].id < entries_[b.second].id;
  });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));

  std::vector<ScoredEntry> out;
  out.reserve(ranked.size());
  for (const auto& [score, idx] : ranked) {
    auto& e = entries_[idx];
    e.usage += 1;
    e.recency = 1.0;
    e.last_used = std::max(e.last_used, now);
    out.push_back({e, score});
  }
  return out;
}

void LtsmStore::decay(Timestamp now) {
  for (auto& e : entries_) {
    const double age = std::max<double>(0.0, static_cast<double>(now - e.last_used));
    e.recency = std::clamp(std::exp(-age / half_life_), 0.0, 1.0);
  }
}

std::vector<LtsmEntry> LtsmStore::prune(int capacity) {
  std::vector<LtsmEntry> removed;
  const auto cap = static_cast<std::size_t>(std::max(capacity, 0));
  if (entries_.size() <= cap) return removed;

  const auto t = thresholds();
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Removal priority: ineligible first (least recent, then id), then eligible by score.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = entries_[a];
    const auto& eb = entries_[b];
    const bool ia = !eligible(ea, t);
    const bool ib = !eligible(eb, t);
    if (ia != ib) return ia;
    if (ia) {
      if (ea.recency != eb.recency) return ea.recency < eb.recency;
      return ea.id < eb.id;
    }
    const double sa = normalized_usage(ea.usage) + ea.recency + ea.confidence;
    const double sb = normalized_usage(eb.usage) + eb.recency + eb.confidence;
    if (sa != sb) return sa < sb;
    return ea.id < eb.id;
  });

  std::vector<bool> drop(entries_.size(), false);
  for (std::size_t i = 0; i < entries_.size() - cap; ++i) drop[order[i]] = true;
  std::vector<LtsmEntry> kept;
  kept.reserve(cap);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    (drop[i] ? removed : kept).push_back(std::move(entries_[i]));
  }
  entries_ = std::move(kept);
  return removed;
}

LtsmStore LtsmStore::restore(LtsmConfig config, double half_life, std::vector<LtsmEntry> entries,
                             int next_entry_seq) {
  LtsmStore store(config, half_life);
  store.entries_ = std::move(entries);
  store.next_entry_seq_ = next_entry_seq;
  return store;
}

}  // namespace fluxmem

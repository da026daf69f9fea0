#include "fluxmem/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "fluxmem/prompts.hpp"

namespace fluxmem::retrieval {

namespace {

bool by_score_then_id(const Ranked& a, const Ranked& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

void truncate(std::vector<Ranked>& ranked, int k) {
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
}

std::set<std::string> content_tokens(std::string_view text) {
  std::set<std::string> out;
  for (auto& t : tokenize(text)) {
    if (!is_stopword(t)) out.insert(std::move(t));
  }
  return out;
}

}  // namespace

void Bm25Index::add(std::string id, std::span<const std::string> tokens) {
  if (docs_.count(id) != 0) throw InvalidArgument("duplicate document id '" + id + "'");
  Doc doc;
  doc.length = static_cast<int>(tokens.size());
  for (const auto& t : tokens) doc.tf[t] += 1;
  for (const auto& [t, n] : doc.tf) df_[t] += 1;
  total_length_ += doc.length;
  docs_.emplace(std::move(id), std::move(doc));
}

void Bm25Index::add_text(std::string id, std::string_view text) {
  const auto tokens = tokenize(text);
  add(std::move(id), tokens);
}

double Bm25Index::avg_doc_length() const {
  if (docs_.empty()) return 0.0;
  return static_cast<double>(total_length_) / static_cast<double>(docs_.size());
}

int Bm25Index::document_frequency(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& token) const {
  const double n = static_cast<double>(docs_.size());
  const double df = document_frequency(token);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Bm25Index::score_doc(const Doc& doc, std::span<const std::string> query_tokens) const {
  const double avg = avg_doc_length();
  const double norm = avg > 0.0 ? static_cast<double>(doc.length) / avg : 0.0;
  double total = 0.0;
  for (const auto& q : query_tokens) {
    auto it = doc.tf.find(q);
    if (it == doc.tf.end()) continue;
    const double tf = it->second;
    total += idf(q) * tf * (k1_ + 1.0) / (tf + k1_ * (1.0 - b_ + b_ * norm));
  }
  return total;
}

double Bm25Index::score(std::string_view id, std::span<const std::string> query_tokens) const {
  auto it = docs_.find(id);
  if (it == docs_.end()) throw InvalidArgument("unknown document id '" + std::string(id) + "'");
  return score_doc(it->second, query_tokens);
}

std::vector<Ranked> bm25_rank(const Bm25Index& index, std::span<const std::string> query_tokens,
                              int k) {
  if (k < 1) throw InvalidArgument("bm25_rank requires k >= 1");
  std::vector<Ranked> ranked;
  for (const auto& [id, doc] : index.docs_) {
    const double s = index.score_doc(doc, query_tokens);
    if (s > 0.0) ranked.push_back({id, s});
  }
  std::sort(ranked.begin(), ranked.end(), by_score_then_id);
  truncate(ranked, k);
  return ranked;
}

std::vector<Ranked> dense_rank(std::span<const std::pair<std::string, Embedding>> items,
                               std::span<const double> query_embedding, int k) {
  if (k < 1) throw InvalidArgument("dense_rank requires k >= 1");
  std::vector<Ranked> ranked;
  ranked.reserve(items.size());
  for (const auto& [id, emb] : items) ranked.push_back({id, cosine(query_embedding, emb)});
  std::sort(ranked.begin(), ranked.end(), by_score_then_id);
  truncate(ranked, k);
  return ranked;
}

std::vector<Ranked> rrf(std::span<const std::vector<std::string>> rankings, int k_rrf) {
  if (k_rrf < 1) throw InvalidArgument("rrf requires k_rrf >= 1");
  std::map<std::string, double> scores;
  for (const auto& list : rankings) {
    for (std::size_t r = 0; r < list.size(); ++r) {
      scores[list[r]] += 1.0 / (static_cast<double>(k_rrf) + static_cast<double>(r + 1));
    }
  }
  std::vector<Ranked> fused;
  fused.reserve(scores.size());
  for (auto& [id, s] : scores) fused.push_back({id, s});
  std::sort(fused.begin(), fused.end(), by_score_then_id);
  return fused;
}

std::string render(const FusedContext& context) {
  std::string out;
  if (!context.stim_pages.empty()) {
    out += "[RECENT]\n";
    out += render_pages(context.stim_pages);
  }
  if (!context.mtem_hits.empty()) {
    out += "[EPISODIC]\n";
    for (const auto& hit : context.mtem_hits) out += render_pages({&hit.page, 1});
  }
  if (!context.ltsm_hits.empty()) {
    out += "[SEMANTIC]\n";
    for (const auto& hit : context.ltsm_hits) {
      out += to_string(hit.entry.kind);
      out += ": ";
      out += hit.entry.content;
      out += '\n';
    }
  }
  out += "[QUERY] ";
  out += context.query;
  return out;
}

FusedContext fuse_context(std::string_view query, const StimBuffer& stim, const MtemStore& mtem,
                          LtsmStore& ltsm, const Extractor& extractor, const Embedder& embedder,
                          const RetrievalConfig& config, Timestamp now) {
  if (config.top_k < 1 || config.fusion_depth < 1) {
    throw InvalidArgument("top_k and fusion_depth must be >= 1");
  }
  FusedContext ctx;
  ctx.query = std::string(query);
  ctx.stim_pages = stim.contents();
  const auto query_embedding = embedder.embed(query);

  if (mtem.page_count() > 0) {
    std::unordered_map<std::string_view, std::pair<const Page*, const EpisodicSession*>> by_id;
    Bm25Index lexical(config.bm25_k1, config.bm25_b);
    for (const auto& session : mtem.sessions()) {
      for (const auto& page : session.pages) {
        by_id.emplace(page.id, std::make_pair(&page, &session));
        lexical.add_text(page.id, page.text());
      }
    }
    const auto query_tokens = tokenize(query);
    const auto entities = extractor.extract_entities(query);

    std::vector<std::vector<std::string>> legs(2);
    for (const auto& r : bm25_rank(lexical, query_tokens, config.fusion_depth)) {
      legs[0].push_back(r.id);
    }
    for (const auto& hit : mtem.retrieve(query_embedding, entities, config.fusion_depth, now)) {
      if (hit.score > 0.0) legs[1].push_back(hit.page.id);
    }
    auto fused = rrf(legs, config.rrf_k);
    truncate(fused, config.top_k);
    for (const auto& r : fused) {
      const auto& [page, session] = by_id.at(r.id);
      ctx.mtem_hits.push_back({*page, session->id, session->structure_kind, r.score});
    }
  }

  ctx.ltsm_hits = ltsm.retrieve(query_embedding, config.top_k, now);
  ctx.rendered = render(ctx);
  return ctx;
}

std::string MockResponder::respond(const FusedContext& context,
                                   std::span<const std::string> choices) const {
  std::vector<std::string> sentences;
  auto add_page = [&](const Page& page) {
    for (auto& s : split_sentences(page.user_text)) sentences.push_back(std::move(s));
    for (auto& s : split_sentences(page.agent_text)) sentences.push_back(std::move(s));
  };
  for (const auto& page : context.stim_pages) add_page(page);
  for (const auto& hit : context.mtem_hits) add_page(hit.page);
  for (const auto& hit : context.ltsm_hits) {
    for (auto& s : split_sentences(hit.entry.content)) sentences.push_back(std::move(s));
  }

  if (!choices.empty()) {
    std::set<std::string> memory;
    for (const auto& s : sentences) {
      auto toks = content_tokens(s);
      memory.insert(toks.begin(), toks.end());
    }
    std::size_t best = 0;
    std::size_t best_overlap = 0;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      std::size_t overlap = 0;
      for (const auto& t : content_tokens(choices[i])) overlap += memory.count(t);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = i;
      }
    }
    return choices[best];
  }

  const auto query_tokens = content_tokens(context.query);
  const std::string* best = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& s : sentences) {
    std::size_t overlap = 0;
    for (const auto& t : content_tokens(s)) overlap += query_tokens.count(t);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = &s;
    }
  }
  return best == nullptr ? std::string(kAbstain) : *best;
}

std::string response_prompt(const FusedContext& context, std::span<const std::string> choices) {
  std::string body = context.rendered;
  if (!choices.empty()) {
    body += "\n[CHOICES]\n";
    for (std::size_t i = 0; i < choices.size(); ++i) {
      body += std::to_string(i + 1) + ". " + choices[i] + "\n";
    }
    body += "Reply with the text of exactly one choice.";
  }
  return prompts::render("response", {{"context", body}});
}

std::string HttpResponder::respond(const FusedContext& context,
                                   std::span<const std::string> choices) const {
  try {
    return chat_complete(settings_, response_prompt(context, choices));
  } catch (const MalformedResponse& e) {
    throw MalformedResponse(e.what(), context.rendered);
  } catch (const ProviderError& e) {
    throw ProviderError(e.what(), context.rendered);
  }
}

std::string answer(const FusedContext& context, const Responder& responder,
                   std::span<const std::string> choices) {
  return responder.respond(context, choices);
}

}  // namespace fluxmem::retrieval

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxmem/core.hpp"
#include "fluxmem/extraction.hpp"
#include "fluxmem/ltsm.hpp"
#include "fluxmem/mtem.hpp"
#include "fluxmem/stim.hpp"

namespace fluxmem::retrieval {

struct Ranked {
  std::string id;
  double score = 0.0;
};

/// Okapi BM25 over tokenized documents.
class Bm25Index {
 public:
  explicit Bm25Index(double k1 = 1.2, double b = 0.75) : k1_(k1), b_(b) {}

  /// Adds a document. Throws InvalidArgument on a duplicate id.
  void add(std::string id, std::span<const std::string> tokens);
  void add_text(std::string id, std::string_view text);

  double score(std::string_view id, std::span<const std::string> query_tokens) const;
  double idf(const std::string& token) const;

  std::size_t size() const noexcept { return docs_.size(); }
  double avg_doc_length() const;
  int document_frequency(const std::string& token) const;
  double k1() const noexcept { return k1_; }
  double b() const noexcept { return b_; }

 private:
  friend std::vector<Ranked> bm25_rank(const Bm25Index&, std::span<const std::string>, int);

  struct Doc {
    std::map<std::string, int> tf;
    int length = 0;
  };

  double score_doc(const Doc& doc, std::span<const std::string> query_tokens) const;

  double k1_;
  double b_;
  std::map<std::string, Doc, std::less<>> docs_;
  std::map<std::string, int> df_;
  long total_length_ = 0;
};

/// Top-k by BM25, ties by ascending id, zero scores dropped. Throws InvalidArgument if k < 1.
std::vector<Ranked> bm25_rank(const Bm25Index& index, std::span<const std::string> query_tokens,
                              int k);

/// Top-k by cosine, ties by ascending id.
std::vector<Ranked> dense_rank(std::span<const std::pair<std::string, Embedding>> items,
                               std::span<const double> query_embedding, int k);

/// Reciprocal rank fusion: score(d) = sum over lists containing d of 1/(k_rrf + rank), rank
/// from 1. Descending, ties by ascending id.
std::vector<Ranked> rrf(std::span<const std::vector<std::string>> rankings, int k_rrf);

struct FusedContext {
  std::string query;
  std::vector<Page> stim_pages;
  std::vector<ScoredPage> mtem_hits;  // score is the fused rank score
  std::vector<ScoredEntry> ltsm_hits;
  std::string rendered;
};

/// Deterministic text form: [RECENT], [EPISODIC] and [SEMANTIC] blocks (each omitted when
/// empty), then "[QUERY] <query>".
std::string render(const FusedContext& context);

/// Assembles the context for a query from all three layers. Increments usage of the
/// returned long-term entries.
FusedContext fuse_context(std::string_view query, const StimBuffer& stim, const MtemStore& mtem,
                          LtsmStore& ltsm, const Extractor& extractor, const Embedder& embedder,
                          const RetrievalConfig& config, Timestamp now);

/// Produces the final answer from a fused context.
class Responder {
 public:
  virtual ~Responder() = default;
  /// With non-empty `choices` the reply is one of the choices verbatim.
  virtual std::string respond(const FusedContext& context,
                              std::span<const std::string> choices = {}) const = 0;
};

inline constexpr std::string_view kAbstain = "I don't know.";

/// Extractive responder: the context sentence sharing the most non-stopword tokens with the
/// query (ties: earliest), or kAbstain. For multiple choice, the choice sharing the most
/// tokens with the context (ties: earliest).
class MockResponder final : public Responder {
 public:
  std::string respond(const FusedContext& context,
                      std::span<const std::string> choices = {}) const override;
};

/// Chat-completions responder using the shipped response template.
class HttpResponder final : public Responder {
 public:
  explicit HttpResponder(LlmSettings settings) : settings_(std::move(settings)) {}
  std::string respond(const FusedContext& context,
                      std::span<const std::string> choices = {}) const override;

 private:
  LlmSettings settings_;
};

/// The prompt HttpResponder sends.
std::string response_prompt(const FusedContext& context, std::span<const std::string> choices);

std::string answer(const FusedContext& context, const Responder& responder,
                   std::span<const std::string> choices = {});

}  // namespace fluxmem::retrieval

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluxmem/core.hpp"

namespace fluxmem {

struct RelationTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const RelationTriple&, const RelationTriple&) = default;
};

struct Extraction {
  std::vector<std::string> entities;  // lowercase, deduplicated, sorted
  std::vector<RelationTriple> relations;
  std::string topic_label;
  std::string summary;
};

enum class FactKind { UserProfile, UserFact, GeneralKnowledge, Strategy };

std::string_view to_string(FactKind kind);
FactKind fact_kind_from_string(std::string_view name);

struct FactCandidate {
  FactKind kind = FactKind::UserFact;
  std::string content;
  double confidence = 1.0;
};

/// Information-extraction provider used for graph indexes, topic labels, summaries,
/// features and long-term consolidation.
class Extractor {
 public:
  virtual ~Extractor() = default;

  virtual std::vector<std::string> extract_entities(std::string_view text) const = 0;
  virtual std::vector<RelationTriple> extract_relations(std::string_view text) const = 0;
  /// Throws InvalidArgument on an empty page list.
  virtual std::string summarize(std::span<const Page> pages) const = 0;
  virtual std::string topic_label(std::span<const Page> pages) const = 0;
  /// Durable facts for long-term memory. May be empty.
  virtual std::vector<FactCandidate> extract_facts(std::span<const Page> pages,
                                                   std::string_view summary) const = 0;

  Extraction extract(std::string_view text) const;
};

/// The fixed 50-word English stopword list.
const std::vector<std::string>& stopwords();
bool is_stopword(std::string_view lowercase_token);

/// Splits on '.', '!', '?' and newlines; keeps terminal punctuation; drops blanks.
std::vector<std::string> split_sentences(std::string_view text);

/// Deterministic, offline extractor based on capitalization and fixed lexicons.
class RuleExtractor final : public Extractor {
 public:
  std::vector<std::string> extract_entities(std::string_view text) const override;
  std::vector<RelationTriple> extract_relations(std::string_view text) const override;
  std::string summarize(std::span<const Page> pages) const override;
  std::string topic_label(std::span<const Page> pages) const override;
  std::vector<FactCandidate> extract_facts(std::span<const Page> pages,
                                           std::string_view summary) const override;
};

struct LlmSettings {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model;
};

/// Reads FLUXMEM_LLM_BASE_URL / FLUXMEM_LLM_KEY / FLUXMEM_LLM_MODEL. Empty base_url when unset.
LlmSettings llm_settings_from_env();

/// Sends a single-user-message chat completion at temperature 0 and returns the reply text.
std::string chat_complete(const LlmSettings& settings, const std::string& prompt);

/// Parses a JSON object out of an LLM reply, tolerating ``` fences around it.
/// Throws MalformedResponse carrying the raw reply.
nlohmann::json parse_llm_json(const std::string& reply);

/// Chat-completions backed extractor driven by the shipped prompt templates.
class LlmExtractor final : public Extractor {
 public:
  explicit LlmExtractor(LlmSettings settings) : settings_(std::move(settings)) {}

  std::vector<std::string> extract_entities(std::string_view text) const override;
  std::vector<RelationTriple> extract_relations(std::string_view text) const override;
  std::string summarize(std::span<const Page> pages) const override;
  std::string topic_label(std::span<const Page> pages) const override;
  std::vector<FactCandidate> extract_facts(std::span<const Page> pages,
                                           std::string_view summary) const override;

 private:
  nlohmann::json ask(const std::string& prompt) const;

  LlmSettings settings_;
};

/// LlmExtractor when FLUXMEM_LLM_BASE_URL is set, RuleExtractor otherwise.
std::unique_ptr<Extractor> make_extractor_from_env();

/// Renders pages as "<ts>\tUSER: ...\tAGENT: ..." lines, the layout prompts and contexts share.
std::string render_pages(std::span<const Page> pages);

}  // namespace fluxmem

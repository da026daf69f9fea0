#include "fluxmem/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_set>

#include "fluxmem/http.hpp"
#include "fluxmem/prompts.hpp"

namespace fluxmem {

std::string_view to_string(FactKind kind) {
  switch (kind) {
    case FactKind::UserProfile:
      return "user_profile";
    case FactKind::UserFact:
      return "user_fact";
    case FactKind::GeneralKnowledge:
      return "general_knowledge";
    case FactKind::Strategy:
      return "strategy";
  }
  return "user_fact";
}

FactKind fact_kind_from_string(std::string_view name) {
  const auto lowered = to_lower(name);
  if (lowered == "user_profile") return FactKind::UserProfile;
  if (lowered == "user_fact") return FactKind::UserFact;
  if (lowered == "general_knowledge") return FactKind::GeneralKnowledge;
  if (lowered == "strategy") return FactKind::Strategy;
  throw InvalidArgument("unknown fact kind '" + std::string(name) + "'");
}

Extraction Extractor::extract(std::string_view text) const {
  Extraction out;
  out.entities = extract_entities(text);
  out.relations = extract_relations(text);
  return out;
}

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> words = {
      "a",    "an",   "the",   "and",   "or",   "but",   "if",    "then", "so",    "of",
      "in",   "on",   "at",    "to",    "for",  "with",  "by",    "from", "about", "as",
      "is",   "are",  "was",   "were",  "be",   "been",  "am",    "i",    "me",    "my",
      "you",  "your", "we",    "our",   "it",   "its",   "this",  "that", "these", "those",
      "what", "which", "who",  "when",  "where", "why",  "how",   "do",   "does",  "did"};
  return words;
}

bool is_stopword(std::string_view lowercase_token) {
  static const std::unordered_set<std::string_view> set(stopwords().begin(), stopwords().end());
  return set.count(lowercase_token) > 0;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    const auto first = current.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) {
      const auto last = current.find_last_not_of(" \t\r\n");
      out.push_back(current.substr(first, last - first + 1));
    }
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') {
      flush();
      continue;
    }
    current.push_back(ch);
    if (ch == '.' || ch == '!' || ch == '?') {
      const bool at_boundary =
          i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
      if (at_boundary) flush();
    }
  }
  flush();
  return out;
}

namespace {

bool is_alnum(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (const char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

// Entities of one sentence, in order of first appearance.
std::vector<std::string> sentence_entities(std::string_view sentence) {
  std::vector<std::string> found;
  std::vector<std::string> run;
  auto flush = [&] {
    if (run.empty()) return;
    std::string name;
    for (const auto& w : run) {
      if (!name.empty()) name.push_back(' ');
      name += to_lower(w);
    }
    if (std::find(found.begin(), found.end(), name) == found.end()) found.push_back(name);
    run.clear();
  };

  bool seen_word = false;
  for (const auto& raw : split_whitespace(sentence)) {
    auto begin = std::find_if(raw.begin(), raw.end(), is_alnum);
    auto end = std::find_if(raw.rbegin(), raw.rend(), is_alnum).base();
    if (begin >= end) {
      flush();
      continue;
    }
    std::string core(begin, end);
    const bool breaks_after = end != raw.end();
    if (core.size() > 2 && (core.ends_with("'s") || core.ends_with("'S"))) {
      core.resize(core.size() - 2);
    }
    const bool sentence_initial = !seen_word;
    seen_word = true;

    const std::string lowered = to_lower(core);
    const bool capitalized = std::isupper(static_cast<unsigned char>(core.front())) != 0;
    const bool pronoun_i = lowered == "i" || lowered.starts_with("i'");
    const bool initial_stopword = sentence_initial && is_stopword(lowered);
    if (capitalized && !pronoun_i && !initial_stopword) {
      run.push_back(core);
    } else {
      flush();
    }
    if (breaks_after) flush();
  }
  flush();
  return found;
}

std::vector<std::pair<std::string, int>> keyword_counts(std::span<const Page> pages) {
  std::map<std::string, int> counts;
  for (const auto& page : pages) {
    for (const auto& tok : tokenize(page.text())) {
      if (!is_stopword(tok)) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  return to_lower(text.substr(0, prefix.size())) == prefix;
}

}  // namespace

std::vector<std::string> RuleExtractor::extract_entities(std::string_view text) const {
  std::set<std::string> all;
  for (const auto& sentence : split_sentences(text)) {
    for (auto& e : sentence_entities(sentence)) all.insert(std::move(e));
  }
  return {all.begin(), all.end()};
}

std::vector<RelationTriple> RuleExtractor::extract_relations(std::string_view text) const {
  std::vector<RelationTriple> out;
  for (const auto& sentence : split_sentences(text)) {
    const auto entities = sentence_entities(sentence);
    if (entities.size() < 2) continue;
    for (std::size_t i = 1; i < entities.size(); ++i) {
      RelationTriple triple{entities.front(), "related_to", entities[i]};
      if (std::find(out.begin(), out.end(), triple) == out.end()) out.push_back(std::move(triple));
    }
  }
  return out;
}

std::string RuleExtractor::summarize(std::span<const Page> pages) const {
  if (pages.empty()) throw InvalidArgument("summarize requires at least one page");
  std::string lead;
  for (const auto* text : {&pages.front().user_text, &pages.front().agent_text}) {
    const auto sentences = split_sentences(*text);
    if (!sentences.empty()) {
      lead = sentences.front();
      break;
    }
  }
  const auto ranked = keyword_counts(pages);
  std::string keywords;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
    if (!keywords.empty()) keywords += ", ";
    keywords += ranked[i].first;
  }
  if (keywords.empty()) return lead;
  return lead.empty() ? "[" + keywords + "]" : lead + " [" + keywords + "]";
}

std::string RuleExtractor::topic_label(std::span<const Page> pages) const {
  if (pages.empty()) throw InvalidArgument("topic_label requires at least one page");
  const auto ranked = keyword_counts(pages);
  return ranked.empty() ? std::string("general") : ranked.front().first;
}

std::vector<FactCandidate> RuleExtractor::extract_facts(std::span<const Page> pages,
                                                        std::string_view /*summary*/) const {
  std::vector<FactCandidate> facts;
  auto add = [&](FactKind kind, const std::string& content, double confidence) {
    const bool duplicate = std::any_of(facts.begin(), facts.end(), [&](const FactCandidate& f) {
      return f.content == content;
    });
    if (!duplicate) facts.push_back({kind, content, confidence});
  };
  for (const auto& page : pages) {
    for (const auto& sentence : split_sentences(page.user_text)) {
      if (sentence.ends_with("?")) continue;
      if (starts_with_ci(sentence, "my name is") || starts_with_ci(sentence, "i am ") ||
          starts_with_ci(sentence, "i'm ")) {
        add(FactKind::UserProfile, sentence, 1.0);
      } else if (starts_with_ci(sentence, "i ") || starts_with_ci(sentence, "my ")) {
        add(FactKind::UserFact, sentence, 1.0);
      }
    }
    for (const auto& sentence : split_sentences(page.agent_text)) {
      if (sentence.ends_with("?")) continue;
      if (starts_with_ci(sentence, "you ") || starts_with_ci(sentence, "your ")) {
        add(FactKind::UserFact, sentence, 0.5);
      }
    }
  }
  return facts;
}

std::string render_pages(std::span<const Page> pages) {
  std::string out;
  for (const auto& page : pages) {
    out += std::to_string(page.timestamp);
    out += "\tUSER: ";
    out += page.user_text;
    out += "\tAGENT: ";
    out += page.agent_text;
    out += '\n';
  }
  return out;
}

LlmSettings llm_settings_from_env() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return std::string(v ? v : "");
  };
  LlmSettings s{env("FLUXMEM_LLM_BASE_URL"), env("FLUXMEM_LLM_KEY"), env("FLUXMEM_LLM_MODEL")};
  if (s.model.empty()) s.model = "gpt-4.1";
  return s;
}

std::string chat_complete(const LlmSettings& settings, const std::string& prompt) {
  if (settings.base_url.empty()) throw ProviderError("no LLM base URL configured");
  std::string url = settings.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const nlohmann::json body = {
      {"model", settings.model},
      {"temperature", 0},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  const auto reply = http::post_json(url, settings.api_key, body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("chat reply lacks choices[0].message.content", reply.dump());
  }
}

nlohmann::json parse_llm_json(const std::string& reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw MalformedResponse("LLM reply contains no JSON object", reply);
  }
  try {
    auto parsed = nlohmann::json::parse(reply.substr(open, close - open + 1));
    if (!parsed.is_object()) throw MalformedResponse("LLM reply is not a JSON object", reply);
    return parsed;
  } catch (const nlohmann::json::parse_error&) {
    throw MalformedResponse("LLM reply is not valid JSON", reply);
  }
}

nlohmann::json LlmExtractor::ask(const std::string& prompt) const {
  return parse_llm_json(chat_complete(settings_, prompt));
}

std::vector<std::string> LlmExtractor::extract_entities(std::string_view text) const {
  const auto reply = ask(prompts::render("entity_relation", {{"text", std::string(text)}}));
  std::set<std::string> all;
  try {
    for (const auto& e : reply.at("entities")) all.insert(to_lower(e.get<std::string>()));
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("entity reply lacks an 'entities' string array", reply.dump());
  }
  return {all.begin(), all.end()};
}

std::vector<RelationTriple> LlmExtractor::extract_relations(std::string_view text) const {
  const auto reply = ask(prompts::render("entity_relation", {{"text", std::string(text)}}));
  std::vector<RelationTriple> out;
  try {
    std::set<std::string> entities;
    for (const auto& e : reply.at("entities")) entities.insert(to_lower(e.get<std::string>()));
    for (const auto& r : reply.at("relations")) {
      RelationTriple t{to_lower(r.at(0).get<std::string>()), to_lower(r.at(1).get<std::string>()),
                       to_lower(r.at(2).get<std::string>())};
      // Endpoints must be declared entities.
      if (entities.count(t.head) && entities.count(t.tail)) out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("relation reply lacks 'entities'/'relations' arrays", reply.dump());
  }
  return out;
}

std::string LlmExtractor::summarize(std::span<const Page> pages) const {
  if (pages.empty()) throw InvalidArgument("summarize requires at least one page");
  const auto reply = ask(prompts::render("meta_info", {{"pages", render_pages(pages)}}));
  try {
    return reply.at("summary").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("meta_info reply lacks 'summary'", reply.dump());
  }
}

std::string LlmExtractor::topic_label(std::span<const Page> pages) const {
  if (pages.empty()) throw InvalidArgument("topic_label requires at least one page");
  const auto reply = ask(prompts::render("hierarchical", {{"pages", render_pages(pages)}}));
  try {
    return to_lower(reply.at("topic").get<std::string>());
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("hierarchical reply lacks 'topic'", reply.dump());
  }
}

std::vector<FactCandidate> LlmExtractor::extract_facts(std::span<const Page> pages,
                                                       std::string_view /*summary*/) const {
  std::vector<FactCandidate> out;
  const auto rendered = render_pages(pages);
  const auto meta = ask(prompts::render("meta_info", {{"pages", rendered}}));
  const auto procedural = ask(prompts::render("procedural", {{"pages", rendered}}));
  try {
    for (const auto& f : meta.value("facts", nlohmann::json::array())) {
      auto content = f.at("content").get<std::string>();
      if (content.empty()) continue;
      out.push_back({fact_kind_from_string(f.at("kind").get<std::string>()), std::move(content),
                     std::clamp(f.value("confidence", 0.5), 0.0, 1.0)});
    }
    for (const auto& s : procedural.value("strategies", nlohmann::json::array())) {
      auto content = s.at("content").get<std::string>();
      if (content.empty()) continue;
      out.push_back({FactKind::Strategy, std::move(content),
                     std::clamp(s.value("confidence", 0.5), 0.0, 1.0)});
    }
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("fact reply has unexpected shape", meta.dump() + procedural.dump());
  } catch (const InvalidArgument& e) {
    throw MalformedResponse(e.what(), meta.dump());
  }
  return out;
}

std::unique_ptr<Extractor> make_extractor_from_env() {
  auto settings = llm_settings_from_env();
  if (settings.base_url.empty()) return std::make_unique<RuleExtractor>();
  return std::make_unique<LlmExtractor>(std::move(settings));
}

}  // namespace fluxmem

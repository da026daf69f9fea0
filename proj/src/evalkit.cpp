#include "fluxmem/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "fluxmem/snapshot.hpp"

namespace fluxmem::evalkit {

using nlohmann::json;

namespace {

std::map<std::string, int> counts_of(std::span<const std::string> tokens) {
  std::map<std::string, int> out;
  for (const auto& t : tokens) out[t] += 1;
  return out;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, int n) {
  std::vector<std::string> out;
  const auto len = static_cast<std::size_t>(n);
  if (tokens.size() < len) return out;
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < len; ++k) g += ' ' + tokens[i + k];
    out.push_back(std::move(g));
  }
  return out;
}

std::size_t clipped_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  const auto ca = counts_of(a);
  const auto cb = counts_of(b);
  std::size_t overlap = 0;
  for (const auto& [g, n] : ca) {
    auto it = cb.find(g);
    if (it != cb.end()) overlap += static_cast<std::size_t>(std::min(n, it->second));
  }
  return overlap;
}

Prf prf(std::size_t overlap, std::size_t cand, std::size_t ref) {
  Prf out;
  if (cand == 0 || ref == 0 || overlap == 0) return out;
  out.precision = static_cast<double>(overlap) / static_cast<double>(cand);
  out.recall = static_cast<double>(overlap) / static_cast<double>(ref);
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

std::string normalize_answer(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return to_lower(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) { throw ParseError(line, what); }

std::string require_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) fail(line, std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) fail(line, std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key, std::size_t line) {
  if (!j.at(key).is_array()) fail(line, std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_string()) fail(line, std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json means_to_json(const MetricMeans& m) {
  return {
      {"cases", m.cases},
      {"errors", m.errors},
      {"f1", m.f1},
      {"bleu1", m.bleu1},
      {"rouge1", m.rouge1},
      {"rouge2", m.rouge2},
      {"rougeL", m.rouge_l},
      {"bertscore", nullptr},
      {"accuracy", m.accuracy_cases > 0 ? json(m.accuracy) : json(nullptr)},
      {"accuracy_cases", m.accuracy_cases},
      {"mem_reward", m.mem_cases > 0 ? json(m.mem_reward) : json(nullptr)},
      {"mem_cases", m.mem_cases},
  };
}

}  // namespace

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = tokenize(prediction);
  const auto g = tokenize(gold);
  if (p.empty() && g.empty()) return 1.0;
  return prf(clipped_overlap(p, g), p.size(), g.size()).f1;
}

double bleu1(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  if (c.empty()) return 0.0;
  const double p1 = static_cast<double>(clipped_overlap(c, r)) / static_cast<double>(c.size());
  const double bp = c.size() > r.size()
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(r.size()) /
                                             static_cast<double>(c.size()));
  return bp * p1;
}

Prf rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n != 1 && n != 2) throw InvalidArgument("rouge_n supports n = 1 or 2");
  const auto ct = tokenize(candidate);
  const auto rt = tokenize(reference);
  const auto c = ngrams(ct, n);
  const auto r = ngrams(rt, n);
  if (c.empty() && r.empty() && !ct.empty() && ct == rt) return {1.0, 1.0, 1.0};
  return prf(clipped_overlap(c, r), c.size(), r.size());
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Prf rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return prf(lcs_length(c, r), c.size(), r.size());
}

double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) {
    throw InvalidArgument("accuracy needs equally many predictions and golds");
  }
  if (predictions.empty()) throw InvalidArgument("accuracy needs at least one prediction");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (normalize_answer(predictions[i]) == normalize_answer(golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double mem_reward(std::span<const std::string> retrieved_page_ids,
                  std::span<const std::string> gold_evidence_ids) {
  const std::set<std::string> gold(gold_evidence_ids.begin(), gold_evidence_ids.end());
  if (gold.empty()) return 0.0;
  const std::set<std::string> got(retrieved_page_ids.begin(), retrieved_page_ids.end());
  std::size_t hit = 0;
  for (const auto& g : gold) hit += got.count(g);
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

BenchmarkCase case_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) fail(line, "case must be a JSON object");
  BenchmarkCase c;
  c.id = require_string(j, "id", line);
  c.question = require_string(j, "question", line);
  c.gold_answer = require_string(j, "gold_answer", line);
  c.category = j.contains("category") ? require_string(j, "category", line) : "default";
  if (j.contains("gold_evidence_ids")) c.gold_evidence_ids = string_list(j, "gold_evidence_ids", line);
  if (j.contains("choices") && !j.at("choices").is_null()) {
    c.choices = string_list(j, "choices", line);
    if (c.choices->empty()) fail(line, "field 'choices' must not be empty");
  }
  if (!j.contains("conversation") || !j.at("conversation").is_array()) {
    fail(line, "field 'conversation' must be an array of sessions");
  }
  std::size_t s = 0;
  for (const auto& session : j.at("conversation")) {
    ++s;
    if (!session.is_array()) fail(line, "session " + std::to_string(s) + " must be an array");
    std::vector<Turn> turns;
    for (const auto& t : session) {
      const auto where = "session " + std::to_string(s) + " turn " + std::to_string(turns.size() + 1);
      if (!t.is_object() || !t.contains("speaker") || !t.contains("text") ||
          !t.contains("timestamp") || !t.at("speaker").is_string() || !t.at("text").is_string() ||
          !t.at("timestamp").is_number_integer()) {
        fail(line, where + " needs string speaker, string text and integer timestamp");
      }
      Turn turn{t.at("speaker").get<std::string>(), t.at("text").get<std::string>(),
                t.at("timestamp").get<Timestamp>()};
      if (turn.timestamp < 0) fail(line, where + " has a negative timestamp");
      if (!turns.empty() && turn.timestamp < turns.back().timestamp) {
        fail(line, where + " goes back in time");
      }
      turns.push_back(std::move(turn));
    }
    c.conversation.push_back(std::move(turns));
  }
  return c;
}

json case_to_json(const BenchmarkCase& c) {
  json conversation = json::array();
  for (const auto& session : c.conversation) {
    json turns = json::array();
    for (const auto& t : session) {
      turns.push_back({{"speaker", t.speaker}, {"text", t.text}, {"timestamp", t.timestamp}});
    }
    conversation.push_back(turns);
  }
  json j = {
      {"id", c.id},
      {"category", c.category},
      {"question", c.question},
      {"gold_answer", c.gold_answer},
      {"gold_evidence_ids", c.gold_evidence_ids},
      {"conversation", conversation},
  };
  if (c.choices) j["choices"] = *c.choices;
  return j;
}

std::vector<BenchmarkCase> load_cases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<BenchmarkCase> cases;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(line, std::string("invalid JSON: ") + e.what());
    }
    cases.push_back(case_from_json(j, line));
  }
  return cases;
}

void save_cases(const std::filesystem::path& path, std::span<const BenchmarkCase> cases) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  for (const auto& c : cases) out << case_to_json(c).dump() << '\n';
}

std::vector<PageSpec> conversation_pages(const BenchmarkCase& c) {
  std::vector<PageSpec> pages;
  std::string lead;
  for (const auto& session : c.conversation) {
    if (!session.empty()) {
      lead = session.front().speaker;
      break;
    }
  }
  for (std::size_t s = 0; s < c.conversation.size(); ++s) {
    int in_session = 0;
    PageSpec* open = nullptr;
    for (const auto& turn : c.conversation[s]) {
      if (turn.speaker == lead || open == nullptr) {
        PageSpec page;
        page.id = "D" + std::to_string(s + 1) + ":" + std::to_string(++in_session);
        page.timestamp = turn.timestamp;
        (turn.speaker == lead ? page.user_text : page.agent_text) = turn.text;
        pages.push_back(std::move(page));
        open = &pages.back();
        continue;
      }
      if (!open->agent_text.empty()) open->agent_text += ' ';
      open->agent_text += turn.text;
    }
  }
  return pages;
}

std::string_view to_string(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::Full: return "full";
    case ReplayMode::FixedLinear: return "fixed-linear";
    case ReplayMode::FixedGraph: return "fixed-graph";
    case ReplayMode::FixedHier: return "fixed-hier";
    case ReplayMode::NoBmm: return "no-bmm";
    case ReplayMode::AblateLinear: return "ablate-linear";
    case ReplayMode::AblateGraph: return "ablate-graph";
    case ReplayMode::AblateHier: return "ablate-hier";
  }
  return "full";
}

const std::vector<ReplayMode>& all_replay_modes() {
  static const std::vector<ReplayMode> modes = {
      ReplayMode::Full,    ReplayMode::FixedLinear,  ReplayMode::FixedGraph,
      ReplayMode::FixedHier, ReplayMode::NoBmm,      ReplayMode::AblateLinear,
      ReplayMode::AblateGraph, ReplayMode::AblateHier};
  return modes;
}

ReplayMode replay_mode_from_string(std::string_view name) {
  for (auto mode : all_replay_modes()) {
    if (to_string(mode) == name) return mode;
  }
  throw InvalidArgument("unknown replay mode '" + std::string(name) + "'");
}

EngineConfig config_for_mode(const EngineConfig& base, ReplayMode mode) {
  EngineConfig c = base;
  auto disable = [&](StructureKind kind) {
    if (std::find(c.selector.disabled.begin(), c.selector.disabled.end(), kind) ==
        c.selector.disabled.end()) {
      c.selector.disabled.push_back(kind);
    }
  };
  switch (mode) {
    case ReplayMode::Full: break;
    case ReplayMode::FixedLinear: c.selector.forced = StructureKind::Linear; break;
    case ReplayMode::FixedGraph: c.selector.forced = StructureKind::Graph; break;
    case ReplayMode::FixedHier: c.selector.forced = StructureKind::Hierarchical; break;
    case ReplayMode::NoBmm:
      c.gate.mode = GateMode::CosineThreshold;
      c.gate.cosine_threshold = 0.5;
      break;
    case ReplayMode::AblateLinear: disable(StructureKind::Linear); break;
    case ReplayMode::AblateGraph: disable(StructureKind::Graph); break;
    case ReplayMode::AblateHier: disable(StructureKind::Hierarchical); break;
  }
  c.validate();
  return c;
}

CaseResult run_case(const BenchmarkCase& c, const EngineConfig& config, const ReplaySetup& setup) {
  CaseResult r;
  r.id = c.id;
  r.category = c.category;
  try {
    Engine engine(config, setup.providers, setup.seed);
    if (setup.model) engine.set_selector_model(*setup.model);
    for (auto& page : conversation_pages(c)) {
      engine.observe_with_id(page.id, page.user_text, page.agent_text, page.timestamp);
    }
    const std::vector<std::string> no_choices;
    const auto result = engine.ask(c.question, c.choices ? *c.choices : no_choices);
    r.answer = result.answer;
    for (const auto& p : result.context.stim_pages) r.retrieved_ids.push_back(p.id);
    for (const auto& h : result.context.mtem_hits) r.retrieved_ids.push_back(h.page.id);
    for (const auto& s : engine.mtem().sessions()) r.structures[std::string(to_string(s.structure_kind))] += 1;

    r.f1 = token_f1(r.answer, c.gold_answer);
    r.bleu1 = bleu1(r.answer, c.gold_answer);
    r.rouge1 = rouge_n(r.answer, c.gold_answer, 1).f1;
    r.rouge2 = rouge_n(r.answer, c.gold_answer, 2).f1;
    r.rouge_l = rouge_l(r.answer, c.gold_answer).f1;
    if (c.choices) {
      const std::vector<std::string> pred{r.answer};
      const std::vector<std::string> gold{c.gold_answer};
      r.accuracy = accuracy(pred, gold);
    }
    if (!c.gold_evidence_ids.empty()) r.mem_reward = mem_reward(r.retrieved_ids, c.gold_evidence_ids);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

void summarize(EvalReport& report) {
  report.categories.clear();
  report.overall = {};
  auto add = [](MetricMeans& m, const CaseResult& r) {
    if (r.error) {
      m.errors += 1;
      return;
    }
    m.cases += 1;
    m.f1 += r.f1;
    m.bleu1 += r.bleu1;
    m.rouge1 += r.rouge1;
    m.rouge2 += r.rouge2;
    m.rouge_l += r.rouge_l;
    if (r.accuracy) {
      m.accuracy_cases += 1;
      m.accuracy += *r.accuracy;
    }
    if (r.mem_reward) {
      m.mem_cases += 1;
      m.mem_reward += *r.mem_reward;
    }
  };
  auto finish = [](MetricMeans& m) {
    if (m.cases > 0) {
      const double n = static_cast<double>(m.cases);
      m.f1 /= n;
      m.bleu1 /= n;
      m.rouge1 /= n;
      m.rouge2 /= n;
      m.rouge_l /= n;
    }
    if (m.accuracy_cases > 0) m.accuracy /= static_cast<double>(m.accuracy_cases);
    if (m.mem_cases > 0) m.mem_reward /= static_cast<double>(m.mem_cases);
  };
  for (const auto& r : report.cases) {
    add(report.categories[r.category], r);
    add(report.overall, r);
  }
  for (auto& [name, m] : report.categories) finish(m);
  finish(report.overall);
}

EvalReport replay(std::span<const BenchmarkCase> cases, const ReplaySetup& setup,
                  ReplayMode mode) {
  const auto config = config_for_mode(setup.config, mode);
  EvalReport report;
  report.mode = std::string(to_string(mode));
  report.seed = setup.seed;
  report.config_fingerprint = config_fingerprint(config);
  for (const auto& c : cases) report.cases.push_back(run_case(c, config, setup));
  std::stable_sort(report.cases.begin(), report.cases.end(),
                   [](const CaseResult& a, const CaseResult& b) { return a.id < b.id; });
  summarize(report);
  return report;
}

json report_to_json(const EvalReport& report) {
  json cases = json::array();
  for (const auto& r : report.cases) {
    json row = {
        {"id", r.id},
        {"category", r.category},
        {"answer", r.answer},
        {"error", r.error ? json(*r.error) : json(nullptr)},
        {"f1", r.f1},
        {"bleu1", r.bleu1},
        {"rouge1", r.rouge1},
        {"rouge2", r.rouge2},
        {"rougeL", r.rouge_l},
        {"bertscore", nullptr},
        {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)},
        {"mem_reward", r.mem_reward ? json(*r.mem_reward) : json(nullptr)},
        {"retrieved_ids", r.retrieved_ids},
        {"structures", r.structures},
    };
    cases.push_back(std::move(row));
  }
  json categories = json::object();
  for (const auto& [name, m] : report.categories) categories[name] = means_to_json(m);
  return {
      {"schema", kReportSchema},
      {"mode", report.mode},
      {"seed", report.seed},
      {"config_fingerprint", report.config_fingerprint},
      {"overall", means_to_json(report.overall)},
      {"categories", categories},
      {"cases", cases},
  };
}

std::string format_table(const EvalReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %5s %7s %7s %7s %7s %7s %7s %7s\n", "category", "n",
                "F1", "BLEU-1", "R-1", "R-2", "R-L", "Acc", "Mem");
  out += buf;
  auto row = [&](const std::string& name, const MetricMeans& m) {
    auto opt = [](std::size_t n, double v) {
      char cell[16];
      if (n == 0) {
        std::snprintf(cell, sizeof(cell), "%7s", "-");
      } else {
        std::snprintf(cell, sizeof(cell), "%7.4f", v);
      }
      return std::string(cell);
    };
    std::snprintf(buf, sizeof(buf), "%-16s %5zu %7.4f %7.4f %7.4f %7.4f %7.4f %s %s\n",
                  name.c_str(), m.cases, m.f1, m.bleu1, m.rouge1, m.rouge2, m.rouge_l,
                  opt(m.accuracy_cases, m.accuracy).c_str(), opt(m.mem_cases, m.mem_reward).c_str());
    out += buf;
  };
  for (const auto& [name, m] : report.categories) row(name, m);
  row("overall", report.overall);
  if (report.overall.errors > 0) {
    out += std::to_string(report.overall.errors) + " case(s) failed; see the JSON report\n";
  }
  return out;
}

selector::FeatureVector case_features(const BenchmarkCase& c, const EngineConfig& config,
                                      const Providers& providers) {
  const auto specs = conversation_pages(c);
  if (specs.empty()) throw InvalidArgument("case '" + c.id + "' has no pages");
  const auto window = std::min<std::size_t>(specs.size(),
                                            static_cast<std::size_t>(config.selector.window));
  std::vector<Page> pages;
  for (std::size_t i = specs.size() - window; i < specs.size(); ++i) {
    pages.push_back(make_page(specs[i].id, specs[i].user_text, specs[i].agent_text,
                              specs[i].timestamp, *providers.embedder));
  }
  return selector::extract_features(pages, *providers.extractor);
}

std::vector<selector::LabeledExample> label_dataset(std::span<const BenchmarkCase> cases,
                                                    const ReplaySetup& setup) {
  std::vector<selector::LabeledExample> out;
  const auto& sel = setup.config.selector;
  for (const auto& c : cases) {
    selector::LabeledExample ex;
    ex.source = c.id;
    ex.features = case_features(c, setup.config, setup.providers);
    for (std::size_t k = 0; k < kAllStructures.size(); ++k) {
      EngineConfig config = setup.config;
      config.selector.forced = kAllStructures[k];
      const auto r = run_case(c, config, setup);
      if (r.error) throw InvalidArgument("case '" + c.id + "' failed: " + *r.error);
      ex.rewards[k] = selector::compute_reward(r.f1, r.mem_reward.value_or(0.0), sel.lambda_q,
                                               sel.lambda_m);
    }
    ex.label = static_cast<StructureKind>(selector::argmax(ex.rewards));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace fluxmem::evalkit

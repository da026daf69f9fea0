#include "fluxmem/snapshot.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fluxmem {

using nlohmann::json;

namespace {

std::string gate_mode_name(GateMode mode) {
  return mode == GateMode::Bmm ? "bmm" : "cosine_threshold";
}

GateMode gate_mode_from(const std::string& name) {
  if (name == "bmm") return GateMode::Bmm;
  if (name == "cosine_threshold") return GateMode::CosineThreshold;
  throw InvalidArgument("unknown gate mode '" + name + "'");
}

// Every key of `given` must exist in `defaults`; objects are checked recursively.
void check_known_keys(const json& given, const json& defaults, const std::string& prefix) {
  if (!given.is_object()) throw InvalidArgument("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw InvalidArgument("unknown config key '" + path + "'");
    if (defaults.at(key).is_object()) check_known_keys(value, defaults.at(key), path);
  }
}

template <typename T>
T read(const json& section, const char* key, const std::string& path) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config key '" + path + "." + key + "' has the wrong type");
  }
}

Embedding embedding_from(const json& j) { return j.get<Embedding>(); }

json index_to_json(const StructureIndex& index) {
  return std::visit(
      [](const auto& idx) -> json {
        using T = std::decay_t<decltype(idx)>;
        if constexpr (std::is_same_v<T, LinearIndex>) {
          return {{"kind", "linear"}, {"page_ids", idx.page_ids}};
        } else if constexpr (std::is_same_v<T, GraphIndex>) {
          json nodes = json::object();
          for (const auto& [entity, pages] : idx.nodes) nodes[entity] = pages;
          json edges = json::array();
          for (const auto& [key, edge] : idx.edges) {
            edges.push_back({key.first, key.second, edge.count,
                             edge.label ? json(*edge.label) : json(nullptr)});
          }
          return {{"kind", "graph"}, {"nodes", nodes}, {"edges", edges}};
        } else {
          json topics = json::array();
          for (const auto& t : idx.topics) {
            topics.push_back({{"label", t.label}, {"page_ids", t.page_ids}});
          }
          return {{"kind", "hierarchical"}, {"topics", topics}};
        }
      },
      index);
}

StructureIndex index_from_json(const json& j, const EpisodicSession& session) {
  const auto kind = structure_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case StructureKind::Linear:
      return LinearIndex{j.at("page_ids").get<std::vector<std::string>>()};
    case StructureKind::Graph: {
      GraphIndex g;
      for (const auto& [entity, pages] : j.at("nodes").items()) {
        g.nodes[entity] = pages.get<std::set<std::string>>();
      }
      for (const auto& e : j.at("edges")) {
        GraphEdge edge;
        edge.count = e.at(2).get<int>();
        if (!e.at(3).is_null()) edge.label = e.at(3).get<std::string>();
        g.edges[{e.at(0).get<std::string>(), e.at(1).get<std::string>()}] = edge;
      }
      return g;
    }
    case StructureKind::Hierarchical: {
      HierIndex h;
      for (const auto& t : j.at("topics")) {
        Topic topic;
        topic.label = t.at("label").get<std::string>();
        topic.page_ids = t.at("page_ids").get<std::vector<std::string>>();
        // Centroids are derived state: re-add members in the order they joined.
        for (const auto& pid : topic.page_ids) {
          const Page* page = session.find_page(pid);
          if (page == nullptr) {
            throw InvalidArgument("topic refers to unknown page '" + pid + "'");
          }
          if (topic.member_sum.empty()) topic.member_sum.assign(page->embedding.size(), 0.0);
          for (std::size_t i = 0; i < page->embedding.size(); ++i) {
            topic.member_sum[i] += page->embedding[i];
          }
        }
        topic.embedding = topic.member_sum;
        normalize_in_place(topic.embedding);
        h.topics.push_back(std::move(topic));
      }
      return h;
    }
  }
  throw InvalidArgument("unknown structure kind");
}

json session_to_json(const EpisodicSession& s) {
  json pages = json::array();
  for (const auto& p : s.pages) pages.push_back(page_to_json(p));
  return {
      {"id", s.id},
      {"summary", s.summary},
      {"summary_embedding", s.summary_embedding},
      {"structure", to_string(s.structure_kind)},
      {"access_count", s.access_count},
      {"created_at", s.created_at},
      {"updated_at", s.updated_at},
      {"pages_since_selection", s.pages_since_selection},
      {"consolidated_pages", s.consolidated_pages},
      {"pages", pages},
      {"index", index_to_json(s.index)},
  };
}

EpisodicSession session_from_json(const json& j) {
  EpisodicSession s;
  s.id = j.at("id").get<std::string>();
  s.summary = j.at("summary").get<std::string>();
  s.summary_embedding = embedding_from(j.at("summary_embedding"));
  s.structure_kind = structure_from_string(j.at("structure").get<std::string>());
  s.access_count = j.at("access_count").get<int>();
  s.created_at = j.at("created_at").get<Timestamp>();
  s.updated_at = j.at("updated_at").get<Timestamp>();
  s.pages_since_selection = j.at("pages_since_selection").get<int>();
  s.consolidated_pages = j.at("consolidated_pages").get<std::size_t>();
  for (const auto& p : j.at("pages")) s.pages.push_back(page_from_json(p));
  s.index = index_from_json(j.at("index"), s);
  if (kind_of(s.index) != s.structure_kind) {
    throw InvalidArgument("session '" + s.id + "' index does not match its structure");
  }
  return s;
}

json entry_to_json(const LtsmEntry& e) {
  return {
      {"id", e.id},
      {"kind", to_string(e.kind)},
      {"content", e.content},
      {"embedding", e.embedding},
      {"usage", e.usage},
      {"recency", e.recency},
      {"confidence", e.confidence},
      {"source_session_id", e.source_session_id},
      {"last_used", e.last_used},
  };
}

LtsmEntry entry_from_json(const json& j) {
  LtsmEntry e;
  e.id = j.at("id").get<std::string>();
  e.kind = fact_kind_from_string(j.at("kind").get<std::string>());
  e.content = j.at("content").get<std::string>();
  e.embedding = embedding_from(j.at("embedding"));
  e.usage = j.at("usage").get<int>();
  e.recency = j.at("recency").get<double>();
  e.confidence = j.at("confidence").get<double>();
  e.source_session_id = j.at("source_session_id").get<std::string>();
  e.last_used = j.at("last_used").get<Timestamp>();
  return e;
}

}  // namespace

json config_to_json(const EngineConfig& c) {
  json disabled = json::array();
  for (auto kind : c.selector.disabled) disabled.push_back(to_string(kind));
  return {
      {"stim", {{"capacity", c.stim.capacity}}},
      {"mtem",
       {{"capacity", c.mtem.capacity},
        {"utility_weights", c.mtem.utility_weights},
        {"max_session_pages", c.mtem.max_session_pages},
        {"candidate_cap", c.mtem.candidate_cap},
        {"consolidation_utility", c.mtem.consolidation_utility},
        {"summary_window", c.mtem.summary_window},
        {"hier_join_threshold", c.mtem.hier_join_threshold},
        {"hier_top_topics", c.mtem.hier_top_topics}}},
      {"ltsm",
       {{"capacity", c.ltsm.capacity},
        {"tau_u", c.ltsm.tau_u},
        {"tau_r", c.ltsm.tau_r},
        {"tau_c", c.ltsm.tau_c},
        {"dedup_cosine", c.ltsm.dedup_cosine}}},
      {"gate",
       {{"mode", gate_mode_name(c.gate.mode)},
        {"threshold", c.gate.threshold},
        {"min_keep", c.gate.min_keep},
        {"em_iters", c.gate.em_iters},
        {"epsilon", c.gate.epsilon},
        {"new_session_floor", c.gate.new_session_floor},
        {"cosine_threshold", c.gate.cosine_threshold}}},
      {"selector",
       {{"lambda_q", c.selector.lambda_q},
        {"lambda_m", c.selector.lambda_m},
        {"window", c.selector.window},
        {"reeval_every", c.selector.reeval_every},
        {"forced", c.selector.forced ? json(to_string(*c.selector.forced)) : json(nullptr)},
        {"disabled", disabled}}},
      {"retrieval",
       {{"rrf_k", c.retrieval.rrf_k},
        {"top_k", c.retrieval.top_k},
        {"bm25_k1", c.retrieval.bm25_k1},
        {"bm25_b", c.retrieval.bm25_b},
        {"fusion_depth", c.retrieval.fusion_depth}}},
      {"embedding_dim", c.embedding_dim},
      {"recency_half_life", c.recency_half_life},
  };
}

EngineConfig config_from_json(const json& given) {
  const json defaults = config_to_json(EngineConfig{});
  check_known_keys(given, defaults, "");
  json j = defaults;
  j.merge_patch(given);
  // merge_patch drops keys set to null; "forced" is the only nullable key.
  if (!j.at("selector").contains("forced")) j["selector"]["forced"] = nullptr;

  EngineConfig c;
  const auto& stim = j.at("stim");
  c.stim.capacity = read<int>(stim, "capacity", "stim");
  const auto& mtem = j.at("mtem");
  c.mtem.capacity = read<int>(mtem, "capacity", "mtem");
  c.mtem.utility_weights = read<std::array<double, 3>>(mtem, "utility_weights", "mtem");
  c.mtem.max_session_pages = read<int>(mtem, "max_session_pages", "mtem");
  c.mtem.candidate_cap = read<int>(mtem, "candidate_cap", "mtem");
  c.mtem.consolidation_utility = read<double>(mtem, "consolidation_utility", "mtem");
  c.mtem.summary_window = read<int>(mtem, "summary_window", "mtem");
  c.mtem.hier_join_threshold = read<double>(mtem, "hier_join_threshold", "mtem");
  c.mtem.hier_top_topics = read<int>(mtem, "hier_top_topics", "mtem");
  const auto& ltsm = j.at("ltsm");
  c.ltsm.capacity = read<int>(ltsm, "capacity", "ltsm");
  c.ltsm.tau_u = read<double>(ltsm, "tau_u", "ltsm");
  c.ltsm.tau_r = read<double>(ltsm, "tau_r", "ltsm");
  c.ltsm.tau_c = read<double>(ltsm, "tau_c", "ltsm");
  c.ltsm.dedup_cosine = read<double>(ltsm, "dedup_cosine", "ltsm");
  const auto& gate = j.at("gate");
  c.gate.mode = gate_mode_from(read<std::string>(gate, "mode", "gate"));
  c.gate.threshold = read<double>(gate, "threshold", "gate");
  c.gate.min_keep = read<int>(gate, "min_keep", "gate");
  c.gate.em_iters = read<int>(gate, "em_iters", "gate");
  c.gate.epsilon = read<double>(gate, "epsilon", "gate");
  c.gate.new_session_floor = read<double>(gate, "new_session_floor", "gate");
  c.gate.cosine_threshold = read<double>(gate, "cosine_threshold", "gate");
  const auto& sel = j.at("selector");
  c.selector.lambda_q = read<double>(sel, "lambda_q", "selector");
  c.selector.lambda_m = read<double>(sel, "lambda_m", "selector");
  c.selector.window = read<int>(sel, "window", "selector");
  c.selector.reeval_every = read<int>(sel, "reeval_every", "selector");
  if (!sel.at("forced").is_null()) {
    c.selector.forced = structure_from_string(read<std::string>(sel, "forced", "selector"));
  }
  for (const auto& name : read<std::vector<std::string>>(sel, "disabled", "selector")) {
    c.selector.disabled.push_back(structure_from_string(name));
  }
  const auto& ret = j.at("retrieval");
  c.retrieval.rrf_k = read<int>(ret, "rrf_k", "retrieval");
  c.retrieval.top_k = read<int>(ret, "top_k", "retrieval");
  c.retrieval.bm25_k1 = read<double>(ret, "bm25_k1", "retrieval");
  c.retrieval.bm25_b = read<double>(ret, "bm25_b", "retrieval");
  c.retrieval.fusion_depth = read<int>(ret, "fusion_depth", "retrieval");
  try {
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.recency_half_life = j.at("recency_half_life").get<double>();
  } catch (const json::exception&) {
    throw InvalidArgument("config keys 'embedding_dim' / 'recency_half_life' must be numbers");
  }
  c.validate();
  return c;
}

EngineConfig apply_override(const EngineConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgument("override must look like key=value, got '" + std::string(assignment) +
                          "'");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) throw InvalidArgument("empty segment in override key '" + path + "'");
    patch = json{{*it, patch}};
  }
  json j = config_to_json(config);
  check_known_keys(patch, j, "");
  // Set the leaf directly so that null survives (merge_patch would delete it).
  json* node = &j;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
  return config_from_json(j);
}

std::string config_fingerprint(const EngineConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(config).dump())));
  return buf;
}

json page_to_json(const Page& p) {
  return {
      {"id", p.id},
      {"user", p.user_text},
      {"agent", p.agent_text},
      {"timestamp", p.timestamp},
      {"last_access", p.last_access},
      {"continuity_link", p.continuity_link ? json(*p.continuity_link) : json(nullptr)},
      {"embedding", p.embedding},
  };
}

Page page_from_json(const json& j) {
  Page p;
  p.id = j.at("id").get<std::string>();
  p.user_text = j.at("user").get<std::string>();
  p.agent_text = j.at("agent").get<std::string>();
  p.timestamp = j.at("timestamp").get<Timestamp>();
  p.last_access = j.at("last_access").get<Timestamp>();
  if (!j.at("continuity_link").is_null()) {
    p.continuity_link = j.at("continuity_link").get<std::string>();
  }
  p.embedding = embedding_from(j.at("embedding"));
  return p;
}

json engine_to_json(const Engine& engine) {
  json stim = json::array();
  for (const auto& p : engine.stim().pages()) stim.push_back(page_to_json(p));
  json recent = json::array();
  for (const auto& p : engine.recent()) recent.push_back(page_to_json(p));
  json sessions = json::array();
  for (const auto& s : engine.mtem().sessions()) sessions.push_back(session_to_json(s));
  json entries = json::array();
  for (const auto& e : engine.ltsm().entries()) entries.push_back(entry_to_json(e));
  const auto counts = engine.counts();
  const auto clock = engine.clock();

  return {
      {"format", kSnapshotFormat},
      {"created_at", clock ? json(*clock) : json(nullptr)},
      {"seed", engine.seed()},
      {"config", config_to_json(engine.config())},
      {"provenance", engine.provenance()},
      {"counters",
       {{"observed", counts.observed},
        {"pruned_pages", counts.pruned_pages},
        {"next_page", engine.page_seq()},
        {"next_session", engine.mtem().next_session_seq()},
        {"next_entry", engine.ltsm().next_entry_seq()}}},
      {"stim", stim},
      {"recent", recent},
      {"mtem", sessions},
      {"ltsm", entries},
      {"selector", selector::model_to_json(engine.selector_model())},
  };
}

Engine engine_from_json(const json& j, Providers providers) {
  if (!j.is_object() || j.value("format", std::string()) != kSnapshotFormat) {
    throw InvalidArgument("not a " + std::string(kSnapshotFormat) + " snapshot");
  }
  try {
    const auto config = config_from_json(j.at("config"));
    Engine::State state;
    std::vector<Page> stim_pages;
    for (const auto& p : j.at("stim")) stim_pages.push_back(page_from_json(p));
    state.stim = StimBuffer::restore(config.stim.capacity, std::move(stim_pages));
    for (const auto& p : j.at("recent")) state.recent.push_back(page_from_json(p));
    std::vector<EpisodicSession> sessions;
    for (const auto& s : j.at("mtem")) sessions.push_back(session_from_json(s));
    const auto& counters = j.at("counters");
    state.mtem = MtemStore::restore(config.mtem, config.recency_half_life, std::move(sessions),
                                    counters.at("next_session").get<int>());
    std::vector<LtsmEntry> entries;
    for (const auto& e : j.at("ltsm")) entries.push_back(entry_from_json(e));
    state.ltsm = LtsmStore::restore(config.ltsm, config.recency_half_life, std::move(entries),
                                    counters.at("next_entry").get<int>());
    state.model = selector::model_from_json(j.at("selector"));
    if (!j.at("created_at").is_null()) state.clock = j.at("created_at").get<Timestamp>();
    state.observed = counters.at("observed").get<std::size_t>();
    state.pruned_pages = counters.at("pruned_pages").get<std::size_t>();
    state.page_seq = counters.at("next_page").get<int>();
    state.provenance = j.at("provenance").get<std::vector<std::string>>();
    return Engine::restore(config, std::move(providers), j.at("seed").get<std::uint64_t>(),
                           std::move(state));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("invalid snapshot: ") + e.what());
  }
}

std::string dump_snapshot(const json& snapshot) { return snapshot.dump(2) + "\n"; }

void save_snapshot(const std::filesystem::path& path, const json& snapshot, bool gzip) {
  const auto text = dump_snapshot(snapshot);
  if (gzip) {
    gzFile f = gzopen(path.string().c_str(), "wb9");
    if (f == nullptr) throw InvalidArgument("cannot write " + path.string());
    const int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    if (written != static_cast<int>(text.size())) {
      throw InvalidArgument("short write to " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("short write to " + path.string());
}

json load_snapshot(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidArgument("no snapshot at " + path.string());
  // gzread passes uncompressed files through unchanged.
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw InvalidArgument("cannot read " + path.string());
  std::string text;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(n));
  gzclose(f);
  if (n < 0) throw InvalidArgument("corrupt snapshot " + path.string());
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("snapshot " + path.string() + " is not JSON");
  return j;
}

}  // namespace fluxmem

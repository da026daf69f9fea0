#include "fluxmem/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "fluxmem/http.hpp"

namespace fluxmem {

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::Linear:
      return "linear";
    case StructureKind::Graph:
      return "graph";
    case StructureKind::Hierarchical:
      return "hierarchical";
  }
  return "linear";
}

StructureKind structure_from_string(std::string_view name) {
  const auto lowered = to_lower(name);
  if (lowered == "linear") return StructureKind::Linear;
  if (lowered == "graph") return StructureKind::Graph;
  if (lowered == "hierarchical" || lowered == "hier") return StructureKind::Hierarchical;
  throw InvalidArgument("unknown structure kind '" + std::string(name) + "'");
}

std::string Page::text() const { return user_text + " " + agent_text; }

void EngineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("invalid config: ") + what);
  };
  require(stim.capacity >= 1, "stim.capacity must be >= 1");
  require(mtem.capacity >= 1, "mtem.capacity must be >= 1");
  require(ltsm.capacity >= 1, "ltsm.capacity must be >= 1");
  double weight_sum = 0.0;
  for (double w : mtem.utility_weights) {
    require(w >= 0.0, "mtem.utility_weights must be non-negative");
    weight_sum += w;
  }
  require(std::abs(weight_sum - 1.0) <= 1e-9, "mtem.utility_weights must sum to 1");
  require(mtem.max_session_pages >= 1, "mtem.max_session_pages must be >= 1");
  require(mtem.candidate_cap >= 1, "mtem.candidate_cap must be >= 1");
  require(mtem.summary_window >= 1, "mtem.summary_window must be >= 1");
  require(mtem.hier_top_topics >= 1, "mtem.hier_top_topics must be >= 1");
  for (double t : {ltsm.tau_u, ltsm.tau_r, ltsm.tau_c}) {
    require(t >= 0.0 && t <= 1.0, "ltsm thresholds must lie in [0,1]");
  }
  require(gate.threshold > 0.0 && gate.threshold < 1.0, "gate.threshold must lie in (0,1)");
  require(gate.min_keep >= 1, "gate.min_keep must be >= 1");
  require(gate.em_iters >= 1, "gate.em_iters must be >= 1");
  require(gate.epsilon > 0.0 && gate.epsilon < 0.1, "gate.epsilon must lie in (0,0.1)");
  require(selector.lambda_q >= 0.0 && selector.lambda_m >= 0.0,
          "selector reward weights must be non-negative");
  require(selector.window >= 1, "selector.window must be >= 1");
  require(selector.reeval_every >= 1, "selector.reeval_every must be >= 1");
  require(selector.disabled.size() < kAllStructures.size(),
          "selector.disabled cannot remove every structure");
  require(retrieval.rrf_k >= 1, "retrieval.rrf_k must be >= 1");
  require(retrieval.top_k >= 1, "retrieval.top_k must be >= 1");
  require(retrieval.fusion_depth >= 1, "retrieval.fusion_depth must be >= 1");
  require(embedding_dim >= 1, "embedding_dim must be >= 1");
  require(recency_half_life > 0.0, "recency_half_life must be positive");
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto uch = static_cast<unsigned char>(ch);
    if (std::isalnum(uch)) {
      current.push_back(static_cast<char>(std::tolower(uch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t hash = 0xcbf29ce484222325ULL ^ seed;
  for (const char ch : data) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void normalize_in_place(Embedding& v) {
  const double norm = l2_norm(v);
  if (norm == 0.0) return;
  for (auto& x : v) x /= norm;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

Embedding HashEmbedder::embed(std::string_view text) const {
  Embedding v(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    v[fnv1a64(token, kHashEmbedderSeed) % dimension_] += 1.0;
  }
  normalize_in_place(v);
  return v;
}

HttpEmbedder::HttpEmbedder(std::string url, std::string api_key, std::size_t dimension,
                           std::string model)
    : url_(std::move(url)), api_key_(std::move(api_key)), dimension_(dimension),
      model_(std::move(model)) {}

Embedding HttpEmbedder::embed(std::string_view text) const {
  if (tokenize(text).empty()) return Embedding(dimension_, 0.0);
  nlohmann::json body = {{"input", std::string(text)}};
  if (!model_.empty()) body["model"] = model_;
  const auto reply = http::post_json(url_, api_key_, body);
  Embedding v;
  try {
    v = reply.at("data").at(0).at("embedding").get<Embedding>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("embedding reply lacks data[0].embedding", reply.dump());
  }
  if (v.size() != dimension_) throw DimensionMismatch(dimension_, v.size());
  normalize_in_place(v);
  return v;
}

std::unique_ptr<Embedder> make_embedder_from_env(std::size_t dimension) {
  const char* url = std::getenv("FLUXMEM_EMBED_URL");
  if (url == nullptr || *url == '\0') {
    return std::make_unique<HashEmbedder>(dimension);
  }
  const char* key = std::getenv("FLUXMEM_EMBED_KEY");
  const char* model = std::getenv("FLUXMEM_EMBED_MODEL");
  return std::make_unique<HttpEmbedder>(url, key ? key : "", dimension, model ? model : "");
}

Page make_page(std::string id, std::string user_text, std::string agent_text, Timestamp timestamp,
               const Embedder& embedder) {
  if (timestamp < 0) throw InvalidArgument("page timestamp must be non-negative");
  Page page;
  page.id = std::move(id);
  page.user_text = std::move(user_text);
  page.agent_text = std::move(agent_text);
  page.timestamp = timestamp;
  page.last_access = timestamp;
  page.embedding = embedder.embed(page.text());
  return page;
}

}  // namespace fluxmem

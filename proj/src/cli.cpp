#include "fluxmem/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "fluxmem/engine.hpp"
#include "fluxmem/evalkit.hpp"
#include "fluxmem/selector.hpp"
#include "fluxmem/snapshot.hpp"

namespace fluxmem::cli {

using nlohmann::json;

namespace {

struct TranscriptLine {
  std::string user;
  std::string agent;
  Timestamp timestamp = 0;
};

std::vector<TranscriptLine> read_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open transcript " + path);
  std::vector<TranscriptLine> lines;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(line, "not a JSON object");
    if (!j.contains("user") || !j.at("user").is_string() || !j.contains("agent") ||
        !j.at("agent").is_string()) {
      throw ParseError(line, "expected string fields 'user' and 'agent'");
    }
    if (!j.contains("timestamp") || !j.at("timestamp").is_number_integer()) {
      throw ParseError(line, "expected an integer 'timestamp'");
    }
    lines.push_back({j.at("user").get<std::string>(), j.at("agent").get<std::string>(),
                     j.at("timestamp").get<Timestamp>()});
  }
  return lines;
}

template <typename T>
std::vector<T> read_jsonl(const std::string& path, T (*parse)(const json&)) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::vector<T> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(line, "invalid JSON");
    try {
      out.push_back(parse(j));
    } catch (const json::exception& e) {
      throw ParseError(line, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(line, e.what());
    }
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument(path + " is not valid JSON");
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

EngineConfig build_config(const std::string& config_path, const std::vector<std::string>& sets) {
  EngineConfig config;
  if (!config_path.empty()) config = config_from_json(read_json_file(config_path));
  for (const auto& s : sets) config = apply_override(config, s);
  return config;
}

void print_counts(std::ostream& out, const LayerCounts& c) {
  out << "observed " << c.observed << " pages\n"
      << "stim     " << c.stim << " pages\n"
      << "mtem     " << c.mtem_sessions << " sessions, " << c.mtem_pages << " pages\n"
      << "ltsm     " << c.ltsm << " entries\n";
  if (c.pruned_pages > 0) out << "pruned   " << c.pruned_pages << " pages\n";
}

struct Options {
  std::uint64_t seed = 42;
  std::string config_path;
  std::vector<std::string> sets;

  std::string transcript;
  std::string snapshot;
  std::string model_path;
  bool gzip = false;
  bool append = false;

  std::string query;
  std::vector<std::string> choices;
  bool show_context = false;
  bool as_json = false;
  bool commit = false;

  std::string cases;
  std::string data;
  std::string out_path;
  std::string mode = "full";

  int epochs = 200;
  double learning_rate = 1e-2;
  int batch_size = 16;
  int patience = 20;
  double validation_fraction = 0.1;
};

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto lines = read_transcript(o.transcript);
  Providers providers;
  std::optional<Engine> engine;
  if (o.append) {
    const auto snap = load_snapshot(o.snapshot);
    auto config = config_from_json(snap.at("config"));
    for (const auto& s : o.sets) config = apply_override(config, s);
    providers = Providers::from_env(static_cast<std::size_t>(config.embedding_dim));
    engine.emplace(engine_from_json(snap, providers));
  } else {
    const auto config = build_config(o.config_path, o.sets);
    providers = Providers::from_env(static_cast<std::size_t>(config.embedding_dim));
    engine.emplace(config, providers, o.seed);
  }
  if (!o.model_path.empty()) {
    engine->set_selector_model(selector::model_from_json(read_json_file(o.model_path)));
  }
  for (const auto& s : o.sets) engine->provenance().push_back("--set " + s);

  for (const auto& l : lines) engine->observe(l.user, l.agent, l.timestamp);
  save_snapshot(o.snapshot, engine_to_json(*engine), o.gzip);
  print_counts(out, engine->counts());
  out << "snapshot " << o.snapshot << "\n";
  return kOk;
}

int cmd_query(const Options& o, std::ostream& out) {
  const auto snap = load_snapshot(o.snapshot);
  const auto config = config_from_json(snap.at("config"));
  auto engine =
      engine_from_json(snap, Providers::from_env(static_cast<std::size_t>(config.embedding_dim)));
  const auto result = engine.ask(o.query, o.choices);
  if (o.as_json) {
    json mtem = json::array();
    for (const auto& h : result.context.mtem_hits) {
      mtem.push_back({{"id", h.page.id},
                      {"session", h.session_id},
                      {"structure", to_string(h.structure)},
                      {"score", h.score}});
    }
    json ltsm = json::array();
    for (const auto& h : result.context.ltsm_hits) {
      ltsm.push_back({{"id", h.entry.id},
                      {"kind", to_string(h.entry.kind)},
                      {"content", h.entry.content},
                      {"score", h.score}});
    }
    json stim = json::array();
    for (const auto& p : result.context.stim_pages) stim.push_back(p.id);
    out << json{{"schema", "fluxmem-query/1"},
                {"query", o.query},
                {"answer", result.answer},
                {"query_entities", result.trace.query_entities},
                {"stim", stim},
                {"mtem_hits", mtem},
                {"ltsm_hits", ltsm},
                {"rendered", result.context.rendered}}
               .dump(2)
        << "\n";
  } else {
    if (o.show_context) out << result.context.rendered << "\n\n";
    out << result.answer << "\n";
  }
  if (o.commit) save_snapshot(o.snapshot, engine_to_json(engine), o.gzip);
  return kOk;
}

int cmd_label(const Options& o, std::ostream& out) {
  const auto cases = evalkit::load_cases(o.cases);
  evalkit::ReplaySetup setup;
  setup.config = build_config(o.config_path, o.sets);
  setup.providers = Providers::from_env(static_cast<std::size_t>(setup.config.embedding_dim));
  setup.seed = o.seed;
  const auto examples = evalkit::label_dataset(cases, setup);
  std::string text;
  std::array<int, 3> per_label{};
  for (const auto& ex : examples) {
    text += selector::example_to_json(ex).dump() + "\n";
    per_label[static_cast<std::size_t>(ex.label)] += 1;
  }
  write_text(o.out_path, text);
  out << "labeled " << examples.size() << " examples (linear " << per_label[0] << ", graph "
      << per_label[1] << ", hierarchical " << per_label[2] << ") -> " << o.out_path << "\n";
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto examples = read_jsonl<selector::LabeledExample>(o.data, &selector::example_from_json);
  selector::TrainOptions opts;
  opts.epochs = o.epochs;
  opts.learning_rate = o.learning_rate;
  opts.batch_size = o.batch_size;
  opts.seed = o.seed;
  opts.patience = o.patience;
  opts.validation_fraction = o.validation_fraction;
  const auto result = selector::train(examples, opts);
  write_text(o.out_path, selector::model_to_json(result.model).dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "train loss %.6f accuracy %.4f\n", result.train_loss,
                result.train_accuracy);
  out << buf;
  if (result.validation_loss) {
    std::snprintf(buf, sizeof(buf), "validation loss %.6f accuracy %.4f\n",
                  *result.validation_loss, *result.validation_accuracy);
    out << buf;
  }
  out << "epochs " << result.epochs_run << " (best " << result.best_epoch << ") -> "
      << o.out_path << "\n";
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto mode = evalkit::replay_mode_from_string(o.mode);
  const auto cases = evalkit::load_cases(o.cases);
  evalkit::ReplaySetup setup;
  setup.config = build_config(o.config_path, o.sets);
  setup.providers = Providers::from_env(static_cast<std::size_t>(setup.config.embedding_dim));
  setup.seed = o.seed;
  if (!o.model_path.empty()) {
    setup.model = selector::model_from_json(read_json_file(o.model_path));
  }
  const auto report = evalkit::replay(cases, setup, mode);
  out << "mode " << report.mode << ", " << report.cases.size() << " cases, config "
      << report.config_fingerprint << "\n";
  out << evalkit::format_table(report);
  if (!o.out_path.empty()) {
    write_text(o.out_path, evalkit::report_to_json(report).dump(2) + "\n");
    out << "report -> " << o.out_path << "\n";
  }
  return kOk;
}

int cmd_inspect(const Options& o, std::ostream& out) {
  const auto snap = load_snapshot(o.snapshot);
  const auto config = config_from_json(snap.at("config"));
  const auto engine = engine_from_json(snap, Providers::deterministic(
                                                 static_cast<std::size_t>(config.embedding_dim)));
  out << "format " << kSnapshotFormat << ", seed " << engine.seed() << ", config "
      << config_fingerprint(engine.config()) << "\n";
  print_counts(out, engine.counts());
  std::map<std::string, int> kinds;
  for (const auto& s : engine.mtem().sessions()) {
    kinds[std::string(to_string(s.structure_kind))] += 1;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "  %s  %-12s %3zu pages  merges %3d  ", s.id.c_str(),
                  std::string(to_string(s.structure_kind)).c_str(), s.pages.size(),
                  s.access_count);
    out << buf << s.summary << "\n";
  }
  for (const auto& [kind, n] : kinds) out << kind << ": " << n << " sessions\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fluxmem: hierarchical conversational memory"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed for every random draw")->capture_default_str();
    sub->add_option("--config", o.config_path, "Engine config JSON file");
    sub->add_option("--set", o.sets, "Config override key=value (dotted path), repeatable");
  };

  auto* ingest = app.add_subcommand("ingest", "Stream a JSONL transcript into a snapshot");
  ingest->add_option("transcript", o.transcript, "JSONL of {user, agent, timestamp}")->required();
  ingest->add_option("-o,--snapshot", o.snapshot, "Snapshot to write")->required();
  ingest->add_option("--model", o.model_path, "Selector model JSON");
  ingest->add_flag("--gzip", o.gzip, "Compress the snapshot");
  ingest->add_flag("--append", o.append, "Continue from the existing snapshot");
  common(ingest);

  auto* query = app.add_subcommand("query", "Answer a question from a snapshot");
  query->add_option("snapshot", o.snapshot, "Snapshot file")->required();
  query->add_option("text", o.query, "Question")->required();
  query->add_option("--choice", o.choices, "Multiple-choice option, repeatable");
  query->add_flag("--show-context", o.show_context, "Print the fused context");
  query->add_flag("--json", o.as_json, "Machine-readable output");
  query->add_flag("--commit", o.commit, "Persist long-term usage counters");
  query->add_flag("--gzip", o.gzip, "Compress the snapshot when committing");

  auto* label = app.add_subcommand("label", "Label structures for benchmark cases");
  label->add_option("cases", o.cases, "Benchmark JSONL")->required();
  label->add_option("-o,--out", o.out_path, "Labeled examples JSONL")->required();
  common(label);

  auto* train = app.add_subcommand("train", "Train the structure selector");
  train->add_option("data", o.data, "Labeled examples JSONL")->required();
  train->add_option("-o,--out", o.out_path, "Model JSON to write")->required();
  train->add_option("--epochs", o.epochs)->capture_default_str();
  train->add_option("--lr", o.learning_rate)->capture_default_str();
  train->add_option("--batch-size", o.batch_size)->capture_default_str();
  train->add_option("--patience", o.patience)->capture_default_str();
  train->add_option("--validation-fraction", o.validation_fraction)->capture_default_str();
  train->add_option("--seed", o.seed)->capture_default_str();

  std::vector<std::string> mode_names;
  for (auto m : evalkit::all_replay_modes()) mode_names.emplace_back(evalkit::to_string(m));
  auto* eval = app.add_subcommand("eval", "Replay benchmark cases and score them");
  eval->add_option("cases", o.cases, "Benchmark JSONL")->required();
  eval->add_option("--mode", o.mode, "Replay mode")
      ->check(CLI::IsMember(mode_names))
      ->capture_default_str();
  eval->add_option("--model", o.model_path, "Selector model JSON");
  eval->add_option("-o,--out", o.out_path, "Report JSON to write");
  common(eval);

  auto* inspect = app.add_subcommand("inspect", "Print layer statistics of a snapshot");
  inspect->add_option("snapshot", o.snapshot, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kInputError;
  }

  try {
    if (*ingest) return cmd_ingest(o, out);
    if (*query) return cmd_query(o, out);
    if (*label) return cmd_label(o, out);
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*inspect) return cmd_inspect(o, out);
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kProviderError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace fluxmem::cli

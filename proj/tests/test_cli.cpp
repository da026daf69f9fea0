#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "fluxmem/cli.hpp"
#include "fluxmem/evalkit.hpp"
#include "fluxmem/synthetic.hpp"
#include "support.hpp"

using namespace fluxmem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fluxmem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_demo(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : synthetic::demo_transcript()) {
    text += json{{"user", l.user}, {"agent", l.agent}, {"timestamp", l.timestamp}}.dump() + "\n";
  }
  testing::write_file(path, text);
}

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~EnvGuard() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("ingest, query and inspect") {
  testing::TempDir dir("cli");
  write_demo(dir / "t.jsonl");
  const auto snap = (dir / "s.json").string();
  auto r = run({"ingest", (dir / "t.jsonl").string(), "-o", snap});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("observed 10 pages") != std::string::npos);

  r = run({"query", snap, "What is the name of my cat?"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out == "I adopted a cat named Pixel last week.\n");

  r = run({"query", snap, "What is the name of my cat?", "--json"});
  CHECK(r.code == cli::kOk);
  const auto j = json::parse(r.out);
  CHECK(j.at("schema") == "fluxmem-query/1");
  CHECK(j.at("stim").size() == 4);

  r = run({"query", snap, "Which city?", "--choice", "Lisbon", "--choice", "Paris"});
  CHECK(r.out == "Lisbon\n");

  r = run({"inspect", snap});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("fluxmem-snapshot/1") != std::string::npos);
}

TEST_CASE("ingest with overrides, gzip and append") {
  testing::TempDir dir("cli-append");
  write_demo(dir / "t.jsonl");
  const auto snap = (dir / "s.json.gz").string();
  auto r = run({"ingest", (dir / "t.jsonl").string(), "-o", snap, "--gzip", "--set",
                "stim.capacity=2"});
  REQUIRE(r.code == cli::kOk);
  testing::write_file(dir / "more.jsonl",
                      R"({"user": "I started pottery classes.", "agent": "Fun!", "timestamp": 1700090000})"
                      "\n");
  r = run({"ingest", (dir / "more.jsonl").string(), "-o", snap, "--gzip", "--append"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("observed 11 pages") != std::string::npos);
}

TEST_CASE("input errors exit with 1") {
  testing::TempDir dir("cli-err");
  CHECK(run({}).code == cli::kInputError);
  CHECK(run({"frobnicate"}).code == cli::kInputError);
  CHECK(run({"query", (dir / "missing.json").string(), "q"}).code == cli::kInputError);
  testing::write_file(dir / "bad.jsonl", "{\"user\": \"hi\"}\n");
  auto r = run({"ingest", (dir / "bad.jsonl").string(), "-o", (dir / "s.json").string()});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("line 1") != std::string::npos);
  write_demo(dir / "t.jsonl");
  r = run({"ingest", (dir / "t.jsonl").string(), "-o", (dir / "s.json").string(), "--set",
           "gate.threshold=7"});
  CHECK(r.code == cli::kInputError);
  CHECK(run({"eval", (dir / "t.jsonl").string(), "--mode", "nope"}).code == cli::kInputError);
}

TEST_CASE("unreachable provider exits with 2") {
  testing::TempDir dir("cli-provider");
  write_demo(dir / "t.jsonl");
  const auto snap = (dir / "s.json").string();
  REQUIRE(run({"ingest", (dir / "t.jsonl").string(), "-o", snap}).code == cli::kOk);
  EnvGuard guard("FLUXMEM_LLM_BASE_URL", "http://127.0.0.1:1/v1");
  const auto r = run({"query", snap, "What is the name of my cat?"});
  CHECK(r.code == cli::kProviderError);
  CHECK(r.err.find("provider error") != std::string::npos);
}

TEST_CASE("label, train and eval") {
  testing::TempDir dir("cli-pipeline");
  evalkit::save_cases(dir / "cases.jsonl", synthetic::mixed_suite(1, 9, "cli"));
  auto r = run({"label", (dir / "cases.jsonl").string(), "-o", (dir / "labels.jsonl").string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("labeled 3 examples") != std::string::npos);
  r = run({"train", (dir / "labels.jsonl").string(), "-o", (dir / "model.json").string(),
           "--epochs", "20"});
  REQUIRE(r.code == cli::kOk);
  r = run({"eval", (dir / "cases.jsonl").string(), "--mode", "full", "--model",
           (dir / "model.json").string(), "-o", (dir / "report.json").string()});
  REQUIRE(r.code == cli::kOk);
  const auto report = json::parse(testing::read_file(dir / "report.json"));
  CHECK(report.at("mode") == "full");
  CHECK(report.at("cases").size() == 3);
}

// Writes the shipped synthetic data files into a directory (default: data).
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxmem/evalkit.hpp"
#include "fluxmem/selector.hpp"
#include "fluxmem/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fluxmem;

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic datasets"};
  std::string out_dir = "data";
  std::uint64_t seed = 42;
  app.add_option("-o,--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    std::ofstream out(dir / "selector_clusters.jsonl");
    for (const auto& ex : synthetic::cluster_dataset(300, seed)) {
      out << selector::example_to_json(ex).dump() << '\n';
    }
  }
  const auto suite = synthetic::mixed_suite(10, seed, "syn");
  evalkit::save_cases(dir / "synthetic_suite.jsonl", suite);
  const auto training = synthetic::mixed_suite(20, seed + 1, "train");
  evalkit::save_cases(dir / "selector_training_suite.jsonl", training);
  {
    std::ofstream out(dir / "demo_transcript.jsonl");
    for (const auto& line : synthetic::demo_transcript()) {
      out << nlohmann::json{{"user", line.user}, {"agent", line.agent},
                            {"timestamp", line.timestamp}}
                 .dump()
          << '\n';
    }
  }
  std::cout << "wrote " << suite.size() << " suite cases, " << training.size()
            << " training cases, 300 selector examples to " << dir.string() << '\n';
  return 0;
}

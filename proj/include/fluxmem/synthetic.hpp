#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluxmem/evalkit.hpp"
#include "fluxmem/selector.hpp"

/// Seeded generators for the shipped data: a separable selector dataset, the mixed-pattern
/// conversation suite and a small demo transcript.
namespace fluxmem::synthetic {

/// `count` examples drawn from three well separated Gaussian clusters in feature space, one
/// cluster per structure, in round-robin label order.
std::vector<selector::LabeledExample> cluster_dataset(std::size_t count = 300,
                                                      std::uint64_t seed = 42);

enum class Pattern { Temporal, Entity, Topic };

std::string_view to_string(Pattern pattern);

/// One conversation with a single question.
/// Temporal: an attribute is updated several times and only the latest update answers the
/// question. Entity: the answer sits on a page that mentions a person only by name, the link
/// to the question goes through another page. Topic: several interleaved topics, the answer
/// lives in one of them while other topics carry more of the question's words.
evalkit::BenchmarkCase make_case(Pattern pattern, std::uint64_t seed, std::string id);

/// `per_pattern` cases of each pattern, ids "<prefix>-<pattern>-<nn>".
std::vector<evalkit::BenchmarkCase> mixed_suite(std::size_t per_pattern = 10,
                                                std::uint64_t seed = 42,
                                                const std::string& prefix = "syn");

struct TranscriptLine {
  std::string user;
  std::string agent;
  Timestamp timestamp = 0;
};

/// A short everyday transcript for demos.
std::vector<TranscriptLine> demo_transcript();

}  // namespace fluxmem::synthetic

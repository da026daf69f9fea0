#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fluxmem/engine.hpp"

namespace fluxmem {

inline constexpr std::string_view kSnapshotFormat = "fluxmem-snapshot/1";

nlohmann::json config_to_json(const EngineConfig& config);
/// Starts from the defaults and applies every key present. Unknown keys are rejected.
EngineConfig config_from_json(const nlohmann::json& j);

/// Applies "dotted.path=value" onto a config. The value is parsed as JSON when it parses,
/// otherwise taken as a string. Throws InvalidArgument for unknown paths or bad values.
EngineConfig apply_override(const EngineConfig& config, std::string_view assignment);

/// 16 hex digits identifying a configuration.
std::string config_fingerprint(const EngineConfig& config);

nlohmann::json page_to_json(const Page& page);
Page page_from_json(const nlohmann::json& j);

nlohmann::json engine_to_json(const Engine& engine);
/// Rebuilds an engine around `providers`. Throws InvalidArgument on an unknown format.
Engine engine_from_json(const nlohmann::json& j, Providers providers);

/// Canonical text of a snapshot (2-space indent, trailing newline).
std::string dump_snapshot(const nlohmann::json& snapshot);

/// Writes the snapshot; gzip-compressed when `gzip` is set.
void save_snapshot(const std::filesystem::path& path, const nlohmann::json& snapshot,
                   bool gzip = false);
/// Reads plain or gzip-compressed snapshots. Throws InvalidArgument when missing or invalid.
nlohmann::json load_snapshot(const std::filesystem::path& path);

}  // namespace fluxmem

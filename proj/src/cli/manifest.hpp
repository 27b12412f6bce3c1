#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace chartpulse::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Everything needed to rerun a command: the options object is the complete
/// set of effective flag values, so replay does not depend on defaults or the
/// environment at replay time.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;   // absolute paths
  nlohmann::json options;            // effective flag values
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string rng;
  std::vector<std::string> outputs;  // file names inside options["out_dir"]
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

std::filesystem::path manifest_path(const std::filesystem::path& out_dir, const std::string& command,
                                    const std::string& dataset_id);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Throws DataError for an unreadable or malformed manifest.
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace chartpulse::cli

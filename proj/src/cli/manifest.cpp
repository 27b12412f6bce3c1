#include "cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include "chartpulse/error.hpp"
#include "chartpulse/report.hpp"

namespace chartpulse::cli {

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"command", m.command}, {"inputs", m.inputs}, {"options", m.options},
                     {"seed", m.seed},       {"version", m.version}, {"rng", m.rng},
                     {"outputs", m.outputs}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("command").get_to(m.command);
  j.at("inputs").get_to(m.inputs);
  m.options = j.at("options");
  j.at("seed").get_to(m.seed);
  j.at("version").get_to(m.version);
  j.at("rng").get_to(m.rng);
  j.at("outputs").get_to(m.outputs);
}

std::filesystem::path manifest_path(const std::filesystem::path& out_dir, const std::string& command,
                                    const std::string& dataset_id) {
  return out_dir / (command + "_" + dataset_id + ".manifest.json");
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  write_file_atomic(path, nlohmann::json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read manifest " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return nlohmann::json::parse(text.str()).get<RunManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace chartpulse::cli

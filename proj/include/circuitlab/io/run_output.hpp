#pragma once

// Writes a finished run to disk: artifacts, summary.json,
// effective_config.json and manifest.json.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>

#include "circuitlab/core.hpp"
#include "circuitlab/io/checksum.hpp"
#include "circuitlab/io/scenario.hpp"

namespace circuitlab::io {

/// Filesystem failure while writing outputs.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string summary_text(const RunResult& r) {
  const Json j{{"model", r.model}, {"summary", r.summary}, {"warnings", r.warnings}};
  return j.dump(2) + "\n";
}

inline std::string effective_text(const RunResult& r) { return r.effective.dump(2) + "\n"; }

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Checksums cover every file written except the manifest itself.
inline Json manifest(const RunResult& r, const std::vector<Artifact>& written, double wall_seconds) {
  Json outputs = Json::array();
  for (const auto& a : written)
    outputs.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"checksum", checksum(a.content)}});
  const Json* run = r.effective.contains("run") ? &r.effective["run"] : nullptr;
  return {{"artifact_version", kVersion},
          {"model", r.model},
          {"config_hash", checksum(r.effective.dump())},
          {"seed", run && run->contains("seed") ? (*run)["seed"] : Json(nullptr)},
          {"workers", run && run->contains("workers") ? (*run)["workers"] : Json(nullptr)},
          {"started_utc", utc_timestamp()},
          {"wall_clock_seconds", wall_seconds},
          {"outputs", outputs}};
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("cannot open '" + path.string() + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw OutputError("failed writing '" + path.string() + "'");
}

/// Returns the manifest that was written.
inline Json write_run(const std::filesystem::path& dir, const RunResult& r, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto files = r.files;
  files.push_back({"summary.json", summary_text(r)});
  files.push_back({"effective_config.json", effective_text(r)});
  for (const auto& a : files) write_file(dir / a.name, a.content);
  auto m = manifest(r, files, wall_seconds);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

}  // namespace circuitlab::io

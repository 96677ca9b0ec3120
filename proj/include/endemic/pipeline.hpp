#pragma once

#include <string>

#include "endemic/config.hpp"

namespace endemic {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::string manifest_path;
};

// Executes one pipeline command: ingest, weak-label, make-splits,
// build-graph, embed-graph, fetch-evidence, train, eval, report. Writes a
// per-command manifest (config hash, seed, overrides, artifact checksums)
// under paths.out_dir. Partial artifacts are removed on failure.
RunResult run_command(const std::string& command, const ExperimentConfig& cfg);

// Checksum of a file's bytes (FNV-1a 64, hex) for manifests and
// reproducibility checks.
std::string file_checksum(const std::string& path);

}  // namespace endemic

#pragma once

#include <string>

#include <json.hpp>

#include "gc/jsonio.hpp"

namespace gc::cli {

struct CliOptions {
  std::string configPath;
  std::string outDir;  // overrides output.dir from the config
  bool hasSeed = false;
  unsigned long long seed = 0;
  int threads = 0;
  bool verbose = false;
};

// Exit codes shared by every command.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

// Dispatches one subcommand, writes its artifacts, and echoes the report to
// stdout. Throws gc errors; main maps them to exit codes and error JSON.
int run_command(const std::string& cmd, const CliOptions& opt);

// The invariant suite behind the verify command. Fills `passed`.
nlohmann::ordered_json run_verify(const ExperimentConfig& cfg, bool verbose,
                                  bool& passed);

}  // namespace gc::cli

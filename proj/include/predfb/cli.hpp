#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace predfb {

// Parsed run request. `params` holds the mode-specific section verbatim.
struct RunConfig {
  std::string mode;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: library default
  nlohmann::json params;
};

// Parse and validate a config document. Throws ValidationError.
RunConfig parse_config(const nlohmann::json& doc);

// Execute a run, writing outputs under out_dir. Throws ValidationError or
// NumericError; returns 0 on success.
int run_config(const RunConfig& cfg, const std::string& out_dir);

// Full command-line entry point: predfb <config.json> [--out DIR]
// [--seed S] [--threads K]. Exit codes: 0 success, 2 invalid config or
// arguments, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace predfb

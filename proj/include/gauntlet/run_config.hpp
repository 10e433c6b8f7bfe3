#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gauntlet/eval_harness.hpp"
#include "gauntlet/llm_gateway.hpp"
#include "gauntlet/perturb.hpp"

namespace gauntlet {

struct BenchmarkSpec {
  std::string name;
  std::filesystem::path path;
  BenchmarkFormat format = BenchmarkFormat::JsonLines;
};

// Experiment description for `gauntlet eval`.
//
//   {
//     "seed": 0, "jobs": 4, "defense": false, "offline": false,
//     "cache_dir": "cache", "output_dir": "results",
//     "llm": { "base_url": "...", "model": "...", "api_key_env": "..." },
//     "benchmarks": [ { "name": "alpaca", "path": "alpaca.jsonl", "format": "jsonl" } ],
//     "strategies": [ "noprompt", "spaceinfi" ],
//     "detectors": [ { "type": "perplexity", ... } ]
//   }
//
// Relative paths resolve against the directory holding the config file.
struct RunConfig {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool defense = false;
  bool offline = false;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  std::optional<LlmConfig> llm;
  std::vector<BenchmarkSpec> benchmarks;
  std::vector<StrategyKind> strategies;
  std::vector<nlohmann::json> detectors;
  std::filesystem::path base_dir;
  std::string digest;  // sha256 of the config file bytes

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);
};

struct RunOutputs {
  std::vector<ResultMatrix> matrices;
  std::vector<std::filesystem::path> written;
};

// Runs every benchmark and writes <output_dir>/<benchmark>.{csv,json,md}.
RunOutputs run_experiment(const RunConfig& config);

}  // namespace gauntlet

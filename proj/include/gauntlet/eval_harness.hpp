#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gauntlet/detectors.hpp"
#include "gauntlet/llm_gateway.hpp"
#include "gauntlet/perturb.hpp"

namespace gauntlet {

struct BenchmarkItem {
  std::string id;
  std::string question;
  std::optional<std::string> response;
};

struct Benchmark {
  std::string name;
  std::vector<BenchmarkItem> items;
};

enum class BenchmarkFormat { JsonArray, JsonLines };

BenchmarkFormat parse_benchmark_format(std::string_view name);

// Fields: "id" (string or number; zero-based index when absent), "question"
// or "instruction", optional "response" or "output". Items keep file order.
Benchmark load_benchmark(const std::filesystem::path& path, BenchmarkFormat format,
                         std::string name = {});

// Share of verdicts that are Human. Ties count in the denominator only.
double evasion_rate(std::span<const Verdict> verdicts);

// Deletes every whitespace run that immediately precedes , . ; : ! or ?.
std::string normalize_defense(std::string_view text);

struct DefenseConfig {
  bool enabled = false;
};

struct CellCounts {
  std::size_t evaded = 0;
  std::size_t detected = 0;
  std::size_t tie = 0;
  std::size_t undetermined = 0;

  std::size_t total() const noexcept { return evaded + detected + tie + undetermined; }
  // evaded / (evaded + detected + tie); empty when every item was undetermined.
  std::optional<double> evasion_rate() const;
};

struct ItemRecord {
  std::string strategy;
  std::string item_id;
  std::string detector;
  std::optional<Verdict> verdict;  // empty: undetermined
  std::optional<double> perplexity;
  std::optional<double> burstiness;
  std::optional<double> ai_probability;
  bool perturbation_applied = true;
  std::string error;
};

struct RunMetadata {
  std::string benchmark;
  std::uint64_t seed = 0;
  bool defense = false;
  std::string started_at;
  std::string finished_at;
  std::string config_digest;
};

struct ResultMatrix {
  std::vector<std::string> strategies;
  std::vector<std::string> detectors;
  std::vector<CellCounts> cells;  // row-major, strategy x detector
  std::vector<ItemRecord> records;
  RunMetadata meta;

  const CellCounts& cell(std::size_t strategy, std::size_t detector) const {
    return cells.at(strategy * detectors.size() + detector);
  }
  CellCounts& cell(std::size_t strategy, std::size_t detector) {
    return cells.at(strategy * detectors.size() + detector);
  }
  const CellCounts& cell(std::string_view strategy, std::string_view detector) const;

  // Verdicts of one cell in benchmark item order.
  std::vector<std::optional<Verdict>> verdicts(std::string_view strategy,
                                               std::string_view detector) const;
};

struct MatrixOptions {
  DefenseConfig defense;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  // Used for prompt strategies and for items without a stored response; may
  // be null when neither occurs.
  ResponseSource* generator = nullptr;
  std::string config_digest;
};

// For every item, strategy and detector: obtain the strategy's text (prompt
// strategies generate, edit strategies perturb the NoPrompt response),
// optionally apply the defense, detect, and aggregate. Detector failures are
// recorded as undetermined; generation failures abort the run.
ResultMatrix run_matrix(const Benchmark& benchmark, std::span<const StrategyKind> strategies,
                        std::span<const std::shared_ptr<const Detector>> detectors,
                        const MatrixOptions& options);

enum class ReportFormat { Csv, Json, Markdown };

std::string render_report(const ResultMatrix& matrix, ReportFormat format);
void emit_report(const ResultMatrix& matrix, ReportFormat format, const std::filesystem::path& path);

nlohmann::json to_json(const ResultMatrix& matrix);
ResultMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace gauntlet

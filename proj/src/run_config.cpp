#include "gauntlet/run_config.hpp"

#include <spdlog/spdlog.h>

#include <set>

#include "gauntlet/error.hpp"
#include "gauntlet/hashing.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

BenchmarkFormat format_for(const nlohmann::json& b, const std::filesystem::path& path) {
  if (b.contains("format")) return parse_benchmark_format(b.at("format").get<std::string>());
  return path.extension() == ".json" ? BenchmarkFormat::JsonArray : BenchmarkFormat::JsonLines;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "run config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    c.jobs = j.value("jobs", 1u);
    c.defense = j.value("defense", false);
    c.offline = j.value("offline", false);
    c.cache_dir = resolve(base_dir, j.value("cache_dir", std::string("cache")));
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("results")));
    if (j.contains("llm")) c.llm = LlmConfig::from_json(j.at("llm"));

    std::set<std::string> names;
    for (const auto& b : j.at("benchmarks")) {
      BenchmarkSpec spec;
      spec.path = resolve(base_dir, b.at("path").get<std::string>());
      spec.name = b.value("name", spec.path.stem().string());
      spec.format = format_for(b, spec.path);
      if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos) {
        throw Error(ErrorKind::Config, "benchmark name '" + spec.name + "' is not a plain file name");
      }
      if (!names.insert(spec.name).second) {
        throw Error(ErrorKind::Config, "duplicate benchmark name '" + spec.name + "'");
      }
      c.benchmarks.push_back(std::move(spec));
    }
    for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
    for (const auto& d : j.at("detectors")) c.detectors.push_back(d);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("run config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage) throw Error(ErrorKind::Config, e.what());
    throw;
  }
  if (c.benchmarks.empty()) throw Error(ErrorKind::Config, "run config lists no benchmarks");
  if (c.strategies.empty()) throw Error(ErrorKind::Config, "run config lists no strategies");
  if (c.detectors.empty()) throw Error(ErrorKind::Config, "run config lists no detectors");
  if (c.jobs == 0) c.jobs = 1;
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = serial::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("cannot read run config: ") + e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  RunConfig c = from_json(j, path.parent_path().empty() ? "." : path.parent_path());
  c.digest = sha256_hex(bytes);
  return c;
}

RunOutputs run_experiment(const RunConfig& config) {
  std::vector<std::shared_ptr<const Detector>> detectors;
  std::set<std::string> ids;
  for (const auto& spec : config.detectors) {
    auto d = make_detector(spec, config.base_dir);
    if (!ids.insert(d->id()).second) {
      throw Error(ErrorKind::Config, "duplicate detector id '" + d->id() + "'");
    }
    detectors.push_back(std::move(d));
  }

  std::unique_ptr<CachedGenerator> generator;
  if (config.llm) {
    generator = std::make_unique<CachedGenerator>(*config.llm, config.cache_dir, config.offline);
  }

  MatrixOptions opts;
  opts.defense.enabled = config.defense;
  opts.seed = config.seed;
  opts.jobs = config.jobs;
  opts.generator = generator.get();
  opts.config_digest = config.digest;

  RunOutputs out;
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + config.output_dir.string());

  for (const BenchmarkSpec& spec : config.benchmarks) {
    const Benchmark bench = load_benchmark(spec.path, spec.format, spec.name);
    spdlog::info("eval: {} ({} items, {} strategies, {} detectors)", bench.name, bench.items.size(),
                 config.strategies.size(), detectors.size());
    ResultMatrix m = run_matrix(bench, config.strategies, detectors, opts);
    const std::pair<ReportFormat, const char*> reports[] = {
        {ReportFormat::Csv, ".csv"}, {ReportFormat::Json, ".json"}, {ReportFormat::Markdown, ".md"}};
    for (const auto& [format, ext] : reports) {
      const auto path = config.output_dir / (spec.name + ext);
      emit_report(m, format, path);
      out.written.push_back(path);
    }
    out.matrices.push_back(std::move(m));
  }
  return out;
}

}  // namespace gauntlet

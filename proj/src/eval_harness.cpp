#include "gauntlet/eval_harness.hpp"

#include <fmt/format.h>

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "gauntlet/error.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

BenchmarkFormat parse_benchmark_format(std::string_view name) {
  if (name == "json" || name == "array" || name == "json-array") return BenchmarkFormat::JsonArray;
  if (name == "jsonl" || name == "jsonlines" || name == "json-lines") return BenchmarkFormat::JsonLines;
  throw Error(ErrorKind::Config, "unknown benchmark format '" + std::string(name) +
                                     "' (expected json or jsonl)");
}

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n' ? 1 : 0;
  return line;
}

std::optional<std::string> string_field(const nlohmann::json& obj, const char* primary,
                                        const char* alias, const std::string& where) {
  for (const char* key : {primary, alias}) {
    if (!obj.contains(key) || obj[key].is_null()) continue;
    if (!obj[key].is_string()) {
      throw Error(ErrorKind::Data, where + ": field \"" + key + "\" must be a string");
    }
    return obj[key].get<std::string>();
  }
  return std::nullopt;
}

BenchmarkItem parse_item(const nlohmann::json& obj, std::size_t index, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Data, where + ": expected a JSON object");
  BenchmarkItem item;
  if (obj.contains("id") && !obj["id"].is_null()) {
    const auto& id = obj["id"];
    item.id = id.is_string() ? id.get<std::string>() : id.dump();
  } else {
    item.id = std::to_string(index);
  }
  auto question = string_field(obj, "question", "instruction", where);
  if (!question) {
    throw Error(ErrorKind::Data, where + ": missing \"question\" (or \"instruction\") field");
  }
  item.question = std::move(*question);
  // Alpaca-style records carry an optional extra "input" for the instruction.
  if (obj.contains("input") && obj["input"].is_string() &&
      !obj["input"].get<std::string>().empty()) {
    item.question += "\n\n" + obj["input"].get<std::string>();
  }
  item.response = string_field(obj, "response", "output", where);
  for (const std::string* s : {&item.id, &item.question}) {
    if (!is_valid_utf8(*s)) throw Error(ErrorKind::Encoding, where + ": invalid UTF-8");
  }
  if (item.response && !is_valid_utf8(*item.response)) {
    throw Error(ErrorKind::Encoding, where + ": invalid UTF-8");
  }
  return item;
}

}  // namespace

Benchmark load_benchmark(const std::filesystem::path& path, BenchmarkFormat format,
                         std::string name) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::Io, "benchmark file not found: " + path.string());
  }
  const std::string content = serial::read_file(path);
  Benchmark b;
  b.name = name.empty() ? path.stem().string() : std::move(name);

  if (format == BenchmarkFormat::JsonArray) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Data, fmt::format("{}:{}: malformed JSON: {}", path.string(),
                                               line_of_offset(content, e.byte), e.what()));
    }
    if (!j.is_array()) throw Error(ErrorKind::Data, path.string() + ": expected a top-level array");
    for (std::size_t i = 0; i < j.size(); ++i) {
      b.items.push_back(parse_item(j[i], i, fmt::format("{}: item {}", path.string(), i)));
    }
  } else {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
      std::size_t end = content.find('\n', start);
      if (end == std::string::npos) end = content.size();
      std::string_view line(content.data() + start, end - start);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") != std::string_view::npos) {
        const std::string where = fmt::format("{}:{}", path.string(), line_no);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorKind::Data, where + ": malformed JSON: " + e.what());
        }
        b.items.push_back(parse_item(j, b.items.size(), where));
      }
      start = end + 1;
    }
  }

  if (b.items.empty()) throw Error(ErrorKind::Data, "benchmark " + path.string() + " has no items");
  std::unordered_set<std::string> seen;
  for (const auto& item : b.items) {
    if (!seen.insert(item.id).second) {
      throw Error(ErrorKind::Data, "benchmark " + path.string() + ": duplicate id '" + item.id + "'");
    }
  }
  return b;
}

double evasion_rate(std::span<const Verdict> verdicts) {
  if (verdicts.empty()) throw Error(ErrorKind::Metric, "evasion rate of an empty verdict list");
  std::size_t human = 0;
  for (Verdict v : verdicts) human += v == Verdict::Human ? 1 : 0;
  return static_cast<double>(human) / static_cast<double>(verdicts.size());
}

std::string normalize_defense(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  std::u32string out;
  out.reserve(cps.size());
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_space(cps[i])) {
      out.push_back(cps[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && is_space(cps[j])) ++j;
    const bool before_punct = j < cps.size() && std::u32string_view(U",.;:!?").find(cps[j]) !=
                                                    std::u32string_view::npos;
    if (!before_punct) out.append(cps, i, j - i);
    i = j;
  }
  return encode_utf8(out);
}

std::optional<double> CellCounts::evasion_rate() const {
  const std::size_t denom = evaded + detected + tie;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(evaded) / static_cast<double>(denom);
}

const CellCounts& ResultMatrix::cell(std::string_view strategy, std::string_view detector) const {
  for (std::size_t r = 0; r < strategies.size(); ++r) {
    if (strategies[r] != strategy) continue;
    for (std::size_t c = 0; c < detectors.size(); ++c) {
      if (detectors[c] == detector) return cell(r, c);
    }
  }
  throw Error(ErrorKind::Usage, "no cell for (" + std::string(strategy) + ", " +
                                    std::string(detector) + ")");
}

std::vector<std::optional<Verdict>> ResultMatrix::verdicts(std::string_view strategy,
                                                           std::string_view detector) const {
  std::vector<std::optional<Verdict>> out;
  for (const ItemRecord& r : records) {
    if (r.strategy == strategy && r.detector == detector) out.push_back(r.verdict);
  }
  return out;
}

ResultMatrix run_matrix(const Benchmark& benchmark, std::span<const StrategyKind> strategies,
                        std::span<const std::shared_ptr<const Detector>> detectors,
                        const MatrixOptions& options) {
  if (strategies.empty() || detectors.empty()) {
    throw Error(ErrorKind::Config, "run needs at least one strategy and one detector");
  }
  ResultMatrix m;
  m.meta.benchmark = benchmark.name;
  m.meta.seed = options.seed;
  m.meta.defense = options.defense.enabled;
  m.meta.config_digest = options.config_digest;
  m.meta.started_at = utc_timestamp();
  for (StrategyKind s : strategies) m.strategies.emplace_back(to_string(s));
  for (const auto& d : detectors) {
    if (!d) throw Error(ErrorKind::Config, "null detector");
    m.detectors.push_back(d->id());
  }

  bool needs_noprompt = false;
  for (StrategyKind s : strategies) {
    needs_noprompt = needs_noprompt || s == StrategyKind::NoPrompt || is_edit_strategy(s);
  }

  const std::size_t n_items = benchmark.items.size();
  const std::size_t n_strat = strategies.size();
  const std::size_t n_det = detectors.size();
  // per item: [strategy][detector] records, flattened
  std::vector<std::vector<ItemRecord>> per_item(n_items);

  auto respond = [&](const std::string& prompt) {
    if (!options.generator) {
      throw Error(ErrorKind::Config,
                  "a response must be generated but no language-model gateway is configured");
    }
    return options.generator->respond(prompt);
  };

  auto process = [&](std::size_t idx) {
    const BenchmarkItem& item = benchmark.items[idx];
    std::string noprompt;
    if (needs_noprompt) {
      noprompt = item.response ? *item.response : respond(prompt_for(StrategyKind::NoPrompt, item.question));
    }
    std::vector<ItemRecord>& out = per_item[idx];
    out.reserve(n_strat * n_det);
    for (StrategyKind kind : strategies) {
      Document doc{item.id, item.question, {}, Origin::AiGenerated};
      bool applied = true;
      if (is_prompt_strategy(kind)) {
        doc.text = respond(prompt_for(kind, item.question));
      } else {
        doc.text = noprompt;
        const Strategy strategy = kind == StrategyKind::NoPrompt
                                      ? Strategy::prompt(kind)
                                      : Strategy::edit(kind, options.seed);
        PerturbationOutcome o = apply_strategy(strategy, doc);
        doc.text = std::move(o.text);
        applied = o.applied;
      }
      if (options.defense.enabled) doc.text = normalize_defense(doc.text);

      for (const auto& det : detectors) {
        ItemRecord rec;
        rec.strategy = std::string(to_string(kind));
        rec.item_id = item.id;
        rec.detector = det->id();
        rec.perturbation_applied = applied;
        try {
          const DetectionResult r = det->detect(doc);
          rec.verdict = r.verdict;
          rec.perplexity = r.perplexity;
          rec.burstiness = r.burstiness;
          rec.ai_probability = r.ai_probability;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
        out.push_back(std::move(rec));
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(n_items)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n_items) return;
      try {
        process(idx);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  m.cells.assign(n_strat * n_det, CellCounts{});
  m.records.reserve(n_items * n_strat * n_det);
  for (std::size_t s = 0; s < n_strat; ++s) {
    for (std::size_t i = 0; i < n_items; ++i) {
      for (std::size_t d = 0; d < n_det; ++d) {
        ItemRecord& rec = per_item[i][s * n_det + d];
        CellCounts& cell = m.cell(s, d);
        if (!rec.verdict) {
          ++cell.undetermined;
        } else if (*rec.verdict == Verdict::Human) {
          ++cell.evaded;
        } else if (*rec.verdict == Verdict::AI) {
          ++cell.detected;
        } else {
          ++cell.tie;
        }
        m.records.push_back(std::move(rec));
      }
    }
  }
  m.meta.finished_at = utc_timestamp();
  return m;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string rate_text(const std::optional<double>& r) {
  return r ? fmt::format("{:.4f}", *r) : std::string("NA");
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const ResultMatrix& m) {
  nlohmann::json j;
  j["metadata"] = {
      {"benchmark", m.meta.benchmark},       {"seed", m.meta.seed},
      {"defense", m.meta.defense},           {"started_at", m.meta.started_at},
      {"finished_at", m.meta.finished_at},   {"config_digest", m.meta.config_digest},
  };
  j["strategies"] = m.strategies;
  j["detectors"] = m.detectors;
  j["cells"] = nlohmann::json::array();
  for (std::size_t s = 0; s < m.strategies.size(); ++s) {
    for (std::size_t d = 0; d < m.detectors.size(); ++d) {
      const CellCounts& c = m.cell(s, d);
      j["cells"].push_back({
          {"strategy", m.strategies[s]},
          {"detector", m.detectors[d]},
          {"evaded", c.evaded},
          {"detected", c.detected},
          {"tie", c.tie},
          {"undetermined", c.undetermined},
          {"evasion_rate", opt_json(c.evasion_rate())},
      });
    }
  }
  j["records"] = nlohmann::json::array();
  for (const ItemRecord& r : m.records) {
    nlohmann::json rec = {
        {"strategy", r.strategy},
        {"item", r.item_id},
        {"detector", r.detector},
        {"verdict", r.verdict ? nlohmann::json(std::string(to_string(*r.verdict)))
                              : nlohmann::json("undetermined")},
        {"perplexity", opt_json(r.perplexity)},
        {"burstiness", opt_json(r.burstiness)},
        {"ai_probability", opt_json(r.ai_probability)},
        {"applied", r.perturbation_applied},
    };
    if (!r.error.empty()) rec["error"] = r.error;
    j["records"].push_back(std::move(rec));
  }
  return j;
}

ResultMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    ResultMatrix m;
    const auto& meta = j.at("metadata");
    m.meta.benchmark = meta.at("benchmark").get<std::string>();
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.defense = meta.at("defense").get<bool>();
    m.meta.started_at = meta.at("started_at").get<std::string>();
    m.meta.finished_at = meta.at("finished_at").get<std::string>();
    m.meta.config_digest = meta.at("config_digest").get<std::string>();
    m.strategies = j.at("strategies").get<std::vector<std::string>>();
    m.detectors = j.at("detectors").get<std::vector<std::string>>();
    m.cells.assign(m.strategies.size() * m.detectors.size(), CellCounts{});
    std::size_t k = 0;
    for (const auto& c : j.at("cells")) {
      CellCounts& cell = m.cells.at(k++);
      cell.evaded = c.at("evaded").get<std::size_t>();
      cell.detected = c.at("detected").get<std::size_t>();
      cell.tie = c.at("tie").get<std::size_t>();
      cell.undetermined = c.at("undetermined").get<std::size_t>();
    }
    auto opt = [](const nlohmann::json& v) -> std::optional<double> {
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    for (const auto& r : j.at("records")) {
      ItemRecord rec;
      rec.strategy = r.at("strategy").get<std::string>();
      rec.item_id = r.at("item").get<std::string>();
      rec.detector = r.at("detector").get<std::string>();
      const std::string v = r.at("verdict").get<std::string>();
      if (v != "undetermined") rec.verdict = parse_verdict(v);
      rec.perplexity = opt(r.at("perplexity"));
      rec.burstiness = opt(r.at("burstiness"));
      rec.ai_probability = opt(r.at("ai_probability"));
      rec.perturbation_applied = r.at("applied").get<bool>();
      rec.error = r.value("error", "");
      m.records.push_back(std::move(rec));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed result matrix: ") + e.what());
  }
}

std::string render_report(const ResultMatrix& m, ReportFormat format) {
  std::string out;
  switch (format) {
    case ReportFormat::Csv:
      out = "strategy,detector,evaded,detected,tie,undetermined,evasion_rate\n";
      for (std::size_t s = 0; s < m.strategies.size(); ++s) {
        for (std::size_t d = 0; d < m.detectors.size(); ++d) {
          const CellCounts& c = m.cell(s, d);
          out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(m.strategies[s]),
                             csv_field(m.detectors[d]), c.evaded, c.detected, c.tie,
                             c.undetermined, rate_text(c.evasion_rate()));
        }
      }
      return out;
    case ReportFormat::Json:
      return to_json(m).dump(2) + "\n";
    case ReportFormat::Markdown:
      out = "| strategy |";
      for (const auto& d : m.detectors) out += " " + d + " |";
      out += "\n|---|";
      for (std::size_t d = 0; d < m.detectors.size(); ++d) out += "---:|";
      out += "\n";
      for (std::size_t s = 0; s < m.strategies.size(); ++s) {
        out += "| " + m.strategies[s] + " |";
        for (std::size_t d = 0; d < m.detectors.size(); ++d) {
          out += " " + rate_text(m.cell(s, d).evasion_rate()) + " |";
        }
        out += "\n";
      }
      return out;
  }
  throw Error(ErrorKind::Internal, "unknown report format");
}

void emit_report(const ResultMatrix& matrix, ReportFormat format, const std::filesystem::path& path) {
  serial::write_file(path, render_report(matrix, format));
}

}  // namespace gauntlet

#include "gauntlet/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iterator>
#include <sstream>

#include "gauntlet/corpus_io.hpp"
#include "gauntlet/desk_corpus.hpp"
#include "gauntlet/detectors.hpp"
#include "gauntlet/error.hpp"
#include "gauntlet/hashing.hpp"
#include "gauntlet/ngram_lm.hpp"
#include "gauntlet/perturb.hpp"
#include "gauntlet/run_config.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

namespace {

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TrainLmArgs {
  std::vector<std::string> corpus;
  int order = 4;
  double alpha = 0.1;
  std::string mode = "char";
  std::string out;
};

int cmd_train_lm(const TrainLmArgs& a, std::ostream& out) {
  const TokenMode mode = parse_token_mode(a.mode);
  std::vector<std::string> texts;
  for (const auto& path : a.corpus) {
    for (auto& d : read_corpus(path, Origin::Unknown)) texts.push_back(std::move(d.text));
  }
  const NgramModel model = NgramModel::train(texts, a.order, a.alpha, mode);
  model.save(a.out);
  out << "vocab_size: " << model.vocab_size() << "\n";
  out << "tokens: " << model.training_tokens() << "\n";
  return 0;
}

struct TrainClfArgs {
  std::string ai;
  std::string human;
  ClassifierConfig cfg;
  std::string out;
};

// Documents whose id hashes to 0 mod 10 are held out.
bool held_out(const Document& d) { return fnv1a64(d.id) % 10 == 0; }

int cmd_train_clf(const TrainClfArgs& a, std::ostream& out) {
  std::vector<Document> docs = read_corpus(a.ai, Origin::AiGenerated);
  for (auto& d : read_corpus(a.human, Origin::HumanWritten)) docs.push_back(std::move(d));
  std::vector<Document> train;
  std::vector<Document> test;
  for (auto& d : docs) (held_out(d) ? test : train).push_back(std::move(d));
  const ClassifierModel model = train_classifier(train, a.cfg);
  model.save(a.out);
  out << "train_documents: " << train.size() << "\n";
  out << "held_out_documents: " << test.size() << "\n";
  if (test.empty()) {
    out << "held_out_accuracy: NA\n";
    return 0;
  }
  std::size_t correct = 0;
  for (const Document& d : test) {
    const Verdict v = detect_classifier(model, d).verdict;
    const Verdict want = d.origin == Origin::AiGenerated ? Verdict::AI : Verdict::Human;
    correct += v == want ? 1 : 0;
  }
  out << fmt::format("held_out_accuracy: {:.4f}\n",
                     static_cast<double>(correct) / static_cast<double>(test.size()));
  return 0;
}

struct PerturbArgs {
  std::string strategy;
  std::uint64_t seed = 0;
};

int cmd_perturb(const PerturbArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  const StrategyKind kind = parse_strategy(a.strategy);
  if (is_prompt_strategy(kind)) {
    throw Error(ErrorKind::Usage, "strategy '" + std::string(to_string(kind)) +
                                      "' rewrites the prompt; run it through `gauntlet eval`");
  }
  const std::string text = read_all(in);
  if (!is_valid_utf8(text)) throw Error(ErrorKind::Encoding, "standard input is not valid UTF-8");
  PerturbationOutcome o;
  switch (kind) {
    case StrategyKind::SpaceInfi: o = space_infi(text, a.seed); break;
    case StrategyKind::PeriodInsert: o = period_insert(text, a.seed); break;
    case StrategyKind::PluralFlip: o = plural_flip(text, a.seed); break;
    default: o = PerturbationOutcome{text, true, std::nullopt}; break;
  }
  out << o.text;
  err << "applied=" << (o.applied ? "true" : "false");
  if (o.edit_offset) err << " offset=" << *o.edit_offset;
  err << "\n";
  return 0;
}

struct DetectArgs {
  std::string detector;
  std::string text_file;
};

int cmd_detect(const DetectArgs& a, std::istream& in, std::ostream& out) {
  nlohmann::json spec;
  std::filesystem::path base = std::filesystem::current_path();
  const auto first = a.detector.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && a.detector[first] == '{') {
      spec = nlohmann::json::parse(a.detector);
    } else {
      const std::filesystem::path path(a.detector);
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::Config, "detector spec not found: " + a.detector);
      }
      spec = nlohmann::json::parse(serial::read_file(path));
      if (path.has_parent_path()) base = path.parent_path();
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("detector spec: ") + e.what());
  }
  const auto detector = make_detector(spec, base);
  Document doc;
  doc.id = "input";
  doc.text = a.text_file.empty() ? read_all(in) : serial::read_file(a.text_file);
  if (!is_valid_utf8(doc.text)) throw Error(ErrorKind::Encoding, "input text is not valid UTF-8");
  out << to_json(detector->detect(doc)).dump() << "\n";
  return 0;
}

struct EvalArgs {
  std::string config;
  bool offline = false;
  unsigned jobs = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  RunConfig cfg = RunConfig::load(a.config);
  if (a.offline) cfg.offline = true;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  const RunOutputs res = run_experiment(cfg);
  for (const ResultMatrix& m : res.matrices) {
    out << "## " << m.meta.benchmark << "\n\n" << render_report(m, ReportFormat::Markdown) << "\n";
  }
  return 0;
}

struct SynthArgs {
  std::string kind;
  std::size_t count = 100;
  std::size_t min_bytes = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.kind == "clean") {
    std::string text;
    for (const auto& t : desk::clean_corpus(a.min_bytes, a.seed)) text += t + "\n";
    serial::write_file(a.out, text);
  } else if (a.kind == "ai" || a.kind == "human") {
    const auto docs = a.kind == "ai" ? desk::ai_like_documents(a.count, a.seed)
                                     : desk::human_like_documents(a.count, a.seed);
    write_corpus_jsonl(a.out, docs);
  } else {
    throw Error(ErrorKind::Usage, "unknown synth kind '" + a.kind + "' (expected clean, ai or human)");
  }
  out << "wrote " << a.out << "\n";
  return 0;
}

void configure_logging(const std::string& level, std::ostream& err) {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("gauntlet");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    err << "warning: unknown log level '" << level << "', using warn\n";
    spdlog::set_level(spdlog::level::warn);
  } else {
    spdlog::set_level(lvl);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Evaluate AI-text detectors against evasion strategies", "gauntlet"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  TrainLmArgs lm;
  auto* train_lm = app.add_subcommand("train-lm", "Train an n-gram language model");
  train_lm->add_option("--corpus", lm.corpus, "Corpus file(s): .jsonl or one document per line")
      ->required()
      ->expected(1, -1);
  train_lm->add_option("--order", lm.order, "n-gram order")->capture_default_str();
  train_lm->add_option("--alpha", lm.alpha, "Additive smoothing constant")->capture_default_str();
  train_lm->add_option("--mode", lm.mode, "Token mode: char or wordws")->capture_default_str();
  train_lm->add_option("--out", lm.out, "Model output path")->required();

  TrainClfArgs clf;
  auto* train_clf = app.add_subcommand("train-clf", "Train the character n-gram classifier");
  train_clf->add_option("--ai", clf.ai, "AI-generated corpus")->required();
  train_clf->add_option("--human", clf.human, "Human-written corpus")->required();
  train_clf->add_option("--lr", clf.cfg.learning_rate, "Learning rate")->capture_default_str();
  train_clf->add_option("--epochs", clf.cfg.epochs, "Full-batch epochs")->capture_default_str();
  train_clf->add_option("--ngram-min", clf.cfg.ngram_range.min, "Shortest n-gram")
      ->capture_default_str();
  train_clf->add_option("--ngram-max", clf.cfg.ngram_range.max, "Longest n-gram")
      ->capture_default_str();
  train_clf->add_option("--feature-dim", clf.cfg.feature_dim, "Hash buckets (power of two)")
      ->capture_default_str();
  train_clf->add_option("--tie-band", clf.cfg.tie_band, "Half-width of the Tie band around 0.5")
      ->capture_default_str();
  train_clf->add_option("--out", clf.out, "Model output path")->required();

  PerturbArgs pa;
  auto* perturb = app.add_subcommand("perturb", "Apply an edit strategy to standard input");
  perturb->add_option("--strategy", pa.strategy, "spaceinfi, period, plural or noprompt")
      ->required();
  perturb->add_option("--seed", pa.seed, "Edit seed")->capture_default_str();

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "Classify one document");
  detect->add_option("--detector", da.detector, "Detector spec: JSON file or inline JSON")
      ->required();
  detect->add_option("--text-file", da.text_file, "Input text (default: standard input)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Run a strategy x detector experiment");
  eval->add_option("--config", ea.config, "Run configuration (JSON)")->required();
  eval->add_flag("--offline", ea.offline, "Serve generations from the cache only");
  eval->add_option("--jobs", ea.jobs, "Worker threads (overrides the config)");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic desk-scale corpus");
  synth->add_option("--kind", sa.kind, "clean, ai or human")->required();
  synth->add_option("--count", sa.count, "Documents (ai, human)")->capture_default_str();
  synth->add_option("--min-bytes", sa.min_bytes, "Corpus size (clean)")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", sa.out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  configure_logging(log_level, err);
  try {
    if (*train_lm) return cmd_train_lm(lm, out);
    if (*train_clf) return cmd_train_clf(clf, out);
    if (*perturb) return cmd_perturb(pa, in, out, err);
    if (*detect) return cmd_detect(da, in, out);
    if (*eval) return cmd_eval(ea, out);
    if (*synth) return cmd_synth(sa, out);
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace gauntlet

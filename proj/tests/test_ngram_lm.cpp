#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "gauntlet/desk_corpus.hpp"
#include "gauntlet/error.hpp"
#include "gauntlet/ngram_lm.hpp"
#include "gauntlet/perturb.hpp"
#include "gauntlet/serial.hpp"
#include "support/oracles.hpp"

using namespace gauntlet;
namespace fs = std::filesystem;

namespace {

NgramModel abab() {
  const std::vector<std::string> corpus = {"abababab"};
  return NgramModel::train(corpus, 2, 1.0, TokenMode::Char);
}

std::vector<std::string> ctx(std::initializer_list<std::string> c) { return c; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

const std::vector<std::string>& clean_corpus() {
  static const auto c = desk::clean_corpus(100'000, 21);
  return c;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("gauntlet-ngram-" + std::to_string(::getpid()) + "-" + name);
}

}  // namespace

TEST(NgramTrain, CountsAndSmoothedProbabilities) {
  const NgramModel m = abab();
  EXPECT_EQ(m.vocab_size(), 3u);
  EXPECT_EQ(m.training_tokens(), 8u);
  EXPECT_EQ(m.count(ctx({"a"}), "b"), 4u);
  EXPECT_EQ(m.count(ctx({"b"}), "a"), 3u);
  EXPECT_EQ(m.count(ctx({""}), "a"), 1u);
  EXPECT_DOUBLE_EQ(m.cond_prob(ctx({"a"}), "b"), 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(m.cond_prob(ctx({"b"}), "a"), 2.0 / 3.0);
}

TEST(NgramTrain, UnseenContextIsUniform) {
  const NgramModel m = abab();
  EXPECT_DOUBLE_EQ(m.cond_prob(ctx({"z"}), "a"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.cond_prob(ctx({"z"}), "q"), 1.0 / 3.0);
}

TEST(NgramTrain, ConfigurationErrors) {
  const std::vector<std::string> none;
  const std::vector<std::string> one = {"abc"};
  const std::vector<std::string> blank = {""};
  EXPECT_EQ(kind_of([&] { NgramModel::train(none, 2, 0.1, TokenMode::Char); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { NgramModel::train(one, 0, 0.1, TokenMode::Char); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { NgramModel::train(one, 2, 0.0, TokenMode::Char); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { NgramModel::train(one, 2, NAN, TokenMode::Char); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { NgramModel::train(blank, 2, 0.1, TokenMode::Char); }), ErrorKind::Data);
}

TEST(NgramTrain, WordModeCountsEveryToken) {
  const std::vector<std::string> corpus = {"the cat , sat."};
  const NgramModel m = NgramModel::train(corpus, 2, 0.5, TokenMode::WordWs);
  // the, cat, " ", ",", sat, "."
  EXPECT_EQ(m.training_tokens(), 6u);
  EXPECT_EQ(m.count(ctx({" "}), ","), 1u);
}

TEST(NgramInvariants, NormalizationOverRandomContexts) {
  const NgramModel m = NgramModel::train(clean_corpus(), 4, 0.1, TokenMode::Char);
  std::vector<std::string> vocab;
  for (NgramModel::TokenId id = 0; id < m.vocab_size(); ++id) vocab.push_back(m.surface_of(id));
  std::mt19937_64 rng(4);
  const std::string& text = clean_corpus()[0];
  const auto chars = tokenize(text, TokenMode::Char).tokens;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> c;
    if (i % 2 == 0) {
      const std::size_t at = rng() % (chars.size() - 3);
      for (std::size_t k = 0; k < 3; ++k) c.push_back(chars[at + k].surface);
    } else {
      for (int k = 0; k < 3; ++k) c.push_back(vocab[1 + rng() % (vocab.size() - 1)]);
    }
    double sum = 0;
    for (NgramModel::TokenId id = 0; id < m.vocab_size(); ++id) {
      const std::vector<NgramModel::TokenId> h = {m.id_of(c[0]), m.id_of(c[1]), m.id_of(c[2])};
      sum += m.cond_prob_ids(h, id);
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(NgramInvariants, CountsMatchBruteForceOracle) {
  const std::vector<std::string> corpus(clean_corpus().begin(), clean_corpus().begin() + 40);
  const NgramModel m = NgramModel::train(corpus, 3, 0.1, TokenMode::Char);
  const oracle::CharNgramOracle ref(corpus, 3, 0.1);
  EXPECT_EQ(m.vocab_size(), ref.vocab_size());
  std::mt19937_64 rng(8);
  const auto chars = tokenize(corpus[1], TokenMode::Char).tokens;
  for (int i = 0; i < 500; ++i) {
    const std::size_t at = rng() % (chars.size() - 3);
    const std::vector<std::string> c = {chars[at].surface, chars[at + 1].surface};
    const std::string t = chars[at + 2].surface;
    const auto u = oracle::to_u32(c[0] + c[1]);
    ASSERT_NEAR(m.cond_prob(c, t), static_cast<double>(ref.prob(u, oracle::to_u32(t)[0])), 1e-12);
  }
}

TEST(NgramInvariants, FloorForUnseenSpaceBeforeComma) {
  const auto& corpus = clean_corpus();
  for (const auto& t : corpus) ASSERT_FALSE(desk::has_space_before_comma(t));
  const NgramModel m = NgramModel::train(corpus, 2, 0.1, TokenMode::Char);
  const std::vector<std::string> c = {" "};
  EXPECT_EQ(m.count(c, ","), 0u);
  const double floor = 0.1 / (static_cast<double>(m.context_total(c)) + 0.1 * m.vocab_size());
  EXPECT_DOUBLE_EQ(m.cond_prob(c, ","), floor);
  EXPECT_LT(m.cond_prob(c, ","), 2.0 / static_cast<double>(m.vocab_size()));
}

TEST(NgramInvariants, MonotoneSmoothing) {
  const std::vector<std::string> corpus(clean_corpus().begin(), clean_corpus().begin() + 30);
  std::vector<NgramModel> models;
  for (double a : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    models.push_back(NgramModel::train(corpus, 3, a, TokenMode::Char));
  }
  const double uniform = 1.0 / static_cast<double>(models[0].vocab_size());
  const auto chars = tokenize(corpus[2], TokenMode::Char).tokens;
  for (std::size_t i = 2; i < chars.size(); i += 7) {
    const std::vector<std::string> c = {chars[i - 2].surface, chars[i - 1].surface};
    for (const std::string& t : {chars[i].surface, std::string("e"), std::string("#")}) {
      double prev = std::abs(models[0].cond_prob(c, t) - uniform);
      for (std::size_t k = 1; k < models.size(); ++k) {
        const double d = std::abs(models[k].cond_prob(c, t) - uniform);
        ASSERT_LE(d, prev + 1e-15);
        prev = d;
      }
    }
  }
}

TEST(Perplexity, UniformAndCertainModels) {
  EXPECT_NEAR(perplexity_from_probabilities(std::vector<double>(10, 0.25)), 4.0, 1e-9);
  EXPECT_NEAR(perplexity_from_probabilities(std::vector<double>(1, 0.25)), 4.0, 1e-9);
  EXPECT_EQ(perplexity_from_probabilities(std::vector<double>(50, 1.0)), 1.0);
  EXPECT_EQ(kind_of([] { perplexity_from_log2_probs(std::vector<double>{}); }),
            ErrorKind::DegenerateInput);
}

TEST(Perplexity, MatchesDirectProductOracle) {
  const std::vector<std::string> corpus = {"to be or not to be, that is the question.",
                                           "whether tis nobler in the mind to suffer"};
  const NgramModel m = NgramModel::train(corpus, 3, 0.5, TokenMode::Char);
  const oracle::CharNgramOracle ref(corpus, 3, 0.5);
  const std::string probe = "To be or not to be";
  EXPECT_NEAR(perplexity(m, probe) / static_cast<double>(ref.perplexity(probe)), 1.0, 1e-9);
  EXPECT_GE(perplexity(m, probe), 1.0);
}

TEST(Perplexity, LogAndProductDomainsAgreeOnLongDocuments) {
  const NgramModel m = NgramModel::train(clean_corpus(), 4, 0.1, TokenMode::Char);
  std::string doc;
  for (std::size_t i = 0; doc.size() < 10'000; ++i) doc += desk::ai_like_documents(1, 100 + i)[0].text + " ";
  doc.resize(10'000);
  const auto lp = m.token_log2_probs(tokenize(doc, TokenMode::Char));
  ASSERT_EQ(lp.size(), 10'000u);
  // product kept as mantissa and binary exponent so it never underflows
  double mant = 1.0;
  long exp2 = 0;
  for (double l : lp) {
    int e = 0;
    mant = std::frexp(mant * std::exp2(l), &e);
    exp2 += e;
  }
  const double log2_product = std::log2(mant) + static_cast<double>(exp2);
  const double ppl_product = std::exp2(-log2_product / static_cast<double>(lp.size()));
  EXPECT_NEAR(perplexity_from_log2_probs(lp) / ppl_product, 1.0, 1e-9);
}

TEST(Perplexity, SpaceInfiInflatesUnderCleanModel) {
  const NgramModel m = NgramModel::train(clean_corpus(), 4, 0.1, TokenMode::Char);
  int checked = 0;
  for (const auto& d : desk::ai_like_documents(100, 31)) {
    if (comma_positions(d.text).empty()) continue;
    const auto o = space_infi(d.text, 5);
    EXPECT_GT(perplexity(m, o.text), perplexity(m, d.text));
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(Burstiness, Examples) {
  const std::vector<std::string> corpus = {".......bbbaa"};
  const NgramModel m = NgramModel::train(corpus, 1, 1.0, TokenMode::Char);
  ASSERT_EQ(m.vocab_size(), 4u);
  EXPECT_DOUBLE_EQ(perplexity(m, "."), 2.0);
  EXPECT_DOUBLE_EQ(perplexity(m, "b"), 4.0);
  EXPECT_NEAR(burstiness(m, ". b"), 1.0, 1e-12);
  EXPECT_EQ(burstiness(m, "bab."), 0.0);
  EXPECT_EQ(kind_of([&] { burstiness(m, "   "); }), ErrorKind::DegenerateInput);
}

TEST(Burstiness, MatchesTwoPassOracle) {
  const std::vector<std::string> corpus(clean_corpus().begin(), clean_corpus().begin() + 60);
  const NgramModel m = NgramModel::train(corpus, 4, 0.1, TokenMode::Char);
  const oracle::CharNgramOracle ref(corpus, 4, 0.1);
  for (const auto& d : desk::human_like_documents(20, 41)) {
    const double b = burstiness(m, d.text);
    const double b_ref = static_cast<double>(ref.burstiness(d.text));
    EXPECT_NEAR(b, b_ref, 1e-9 * std::max(1.0, b_ref));
  }
}

TEST(Serialization, RoundTripPreservesScores) {
  const NgramModel m = NgramModel::train(clean_corpus(), 4, 0.1, TokenMode::Char);
  const fs::path path = temp_file("rt.bin");
  save_model(m, path);
  const NgramModel back = load_model(path);
  fs::remove(path);
  const std::string probe = desk::human_like_documents(1, 5)[0].text;
  EXPECT_EQ(perplexity(back, probe), perplexity(m, probe));
  EXPECT_EQ(back.vocab_size(), m.vocab_size());
  EXPECT_EQ(back.context_count(), m.context_count());
  EXPECT_EQ(back.serialize(), m.serialize());
}

TEST(Serialization, TruncatedFileIsFormatError) {
  const std::string bytes = abab().serialize();
  for (std::size_t cut : {std::size_t{0}, std::size_t{4}, std::size_t{12}, bytes.size() / 2,
                          bytes.size() - 1}) {
    EXPECT_EQ(kind_of([&] { NgramModel::deserialize(bytes.substr(0, cut)); }), ErrorKind::Format)
        << "cut at " << cut;
  }
  EXPECT_EQ(kind_of([&] { NgramModel::deserialize(bytes + "x"); }), ErrorKind::Format);
}

TEST(Serialization, UnknownVersionIsVersionError) {
  std::string bytes = abab().serialize();
  bytes[8] = static_cast<char>(kNgramFormatVersion + 1);
  EXPECT_EQ(kind_of([&] { NgramModel::deserialize(bytes); }), ErrorKind::Version);
}

TEST(Serialization, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_model("/nonexistent/model.bin"); }), ErrorKind::Io);
}

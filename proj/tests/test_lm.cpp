#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vsr/errors.hpp"
#include "vsr/lm.hpp"
#include "vsr/rng.hpp"

using vsr::NGramLM;

namespace {

std::vector<std::vector<std::string>> random_corpus(int sentences,
                                                    vsr::Rng& rng) {
  const std::vector<std::string> words = {"ALPHA", "BETA",  "GAMMA",
                                          "DELTA", "OMEGA", "KAPPA"};
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < sentences; ++i) {
    std::vector<std::string> s;
    const int len = 1 + static_cast<int>(rng.below(6));
    for (int j = 0; j < len; ++j) s.push_back(words[rng.below(words.size())]);
    corpus.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace

TEST_CASE("hand-checked absolute discounting on the corpus {A B}") {
  NGramLM lm = NGramLM::estimate({{"A", "B"}}, 2, 0.75);
  // unigram events: A, B, </s>, each count 1 of N=3; T=3 types
  // p1(B) = 0.25/3 + 0.75 * (3/3) * 1/4 = 0.27083333...
  CHECK(std::exp(lm.log_prob({}, "B")) ==
        doctest::Approx(0.27083333333333333).epsilon(1e-12));
  // p(B|A) = (1 - 0.75)/1 + (0.75 * 1/1) * p1(B) = 0.453125
  CHECK(std::exp(lm.log_prob({"A"}, "B")) ==
        doctest::Approx(0.453125).epsilon(1e-12));
}

TEST_CASE("uniform unigram corpus gives equal probabilities and normalizes") {
  std::vector<std::vector<std::string>> corpus;
  const std::vector<std::string> words = {"ONE", "TWO", "SIX", "TEN"};
  for (const auto& w : words) corpus.push_back({w});
  NGramLM lm = NGramLM::estimate(corpus, 1, 0.5);
  const double p0 = std::exp(lm.log_prob({}, "ONE"));
  for (const auto& w : words)
    CHECK(std::exp(lm.log_prob({}, w)) == doctest::Approx(p0).epsilon(1e-12));
  CHECK(lm.context_prob_sum({}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("every context distribution sums to one") {
  vsr::Rng rng(60);
  for (int order : {1, 2, 3}) {
    NGramLM lm = NGramLM::estimate(random_corpus(40, rng), order, 0.75);
    CHECK(lm.context_prob_sum({}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lm.context_prob_sum({"ALPHA"}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lm.context_prob_sum({"GAMMA", "BETA"}) ==
          doctest::Approx(1.0).epsilon(1e-6));
    // unseen / OOV contexts back off and still normalize
    CHECK(lm.context_prob_sum({"NOSUCHWORD"}) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lm.context_prob_sum({NGramLM::kBos}) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("OOV words score as <unk>") {
  vsr::Rng rng(61);
  NGramLM lm = NGramLM::estimate(random_corpus(20, rng), 2, 0.75);
  CHECK(lm.log_prob({}, "QQQXYZ") ==
        doctest::Approx(lm.log_prob({}, NGramLM::kUnk)));
  CHECK(std::isfinite(lm.sentence_log_prob({"ALPHA", "QQQXYZ", "BETA"})));
}

TEST_CASE("ARPA round trip preserves scores") {
  vsr::Rng rng(62);
  NGramLM lm = NGramLM::estimate(random_corpus(40, rng), 3, 0.75);
  const std::string path = "test_lm_roundtrip.arpa";
  lm.save_arpa(path);
  NGramLM back = NGramLM::load_arpa(path);
  CHECK(back.order() == 3);
  const std::vector<std::vector<std::string>> queries = {
      {},
      {"ALPHA"},
      {"ALPHA", "BETA"},
      {"OMEGA", "KAPPA"},
      {"NOSUCHWORD"},
  };
  for (const auto& ctx : queries)
    for (const std::string& w : {std::string("ALPHA"), std::string("DELTA"),
                                 std::string("</s>"), std::string("ZZTOP")})
      CHECK(back.log_prob(ctx, w) ==
            doctest::Approx(lm.log_prob(ctx, w)).epsilon(1e-12));
  CHECK(back.context_prob_sum({"BETA"}) == doctest::Approx(1.0).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("ARPA loader error contracts") {
  CHECK_THROWS_AS(NGramLM::load_arpa("no_such.arpa"), vsr::MissingFile);

  const std::string path = "test_lm_bad.arpa";
  {
    std::ofstream out(path);
    out << "\\data\\\n"
        << "ngram 1=2\n"
        << "\n\\1-grams:\n"
        << "-0.3 HELLO\n"
        << "not-a-number WORLD\n"
        << "\\end\\\n";
  }
  try {
    NGramLM::load_arpa(path);
    CHECK(false);
  } catch (const vsr::ParseError& e) {
    CHECK(std::string(e.what()).find(":6") != std::string::npos);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(NGramLM::estimate({}, 2, 0.75), vsr::EmptyCorpus);
  CHECK_THROWS_AS(NGramLM::estimate({{"A"}}, 0, 0.75), vsr::Error);
  CHECK_THROWS_AS(NGramLM::estimate({{"A"}}, 2, 1.5), vsr::Error);
}

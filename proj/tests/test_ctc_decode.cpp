#include <doctest.h>

#include <cmath>

#include "vsr/ctc_decode.hpp"
#include "vsr/losses.hpp"
#include "vsr/rng.hpp"

using vsr::ctc_greedy;
using vsr::ctc_prefix_beam;
using vsr::Tensor;

namespace {

// rows with a clear argmax at the listed symbols
Tensor frames_with_argmax(const std::vector<int>& symbols, int width,
                          vsr::Rng& rng, double margin = 2.0) {
  Tensor lp({static_cast<int>(symbols.size()), width});
  for (int t = 0; t < lp.dim(0); ++t) {
    double mx = -1e9;
    for (int j = 0; j < width; ++j) {
      lp.at({t, j}) = rng.uniform(-1.0, 1.0);
      mx = std::max(mx, lp.at({t, j}));
    }
    lp.at({t, symbols[static_cast<std::size_t>(t)]}) = mx + margin;
    // renormalize to a valid log-distribution
    double z = 0.0;
    for (int j = 0; j < width; ++j) z += std::exp(lp.at({t, j}));
    for (int j = 0; j < width; ++j) lp.at({t, j}) -= std::log(z);
  }
  return lp;
}

Tensor random_logdist(int rows, int width, vsr::Rng& rng) {
  Tensor t({rows, width});
  for (int r = 0; r < rows; ++r) {
    double z = 0.0;
    for (int j = 0; j < width; ++j) {
      t.at({r, j}) = rng.uniform(-2.0, 2.0);
      z += std::exp(t.at({r, j}));
    }
    for (int j = 0; j < width; ++j) t.at({r, j}) -= std::log(z);
  }
  return t;
}

}  // namespace

TEST_CASE("greedy collapse rules") {
  vsr::Rng rng(50);
  // blank, K, K, blank, AE with class ids {K=0, AE=1}: symbols are col ids
  Tensor a = frames_with_argmax({0, 1, 1, 0, 2}, 3, rng);
  CHECK(ctc_greedy(a) == std::vector<int>{0, 1});

  Tensor b = frames_with_argmax({0, 0, 0}, 3, rng);
  CHECK(ctc_greedy(b) == std::vector<int>{});

  // B B blank B collapses to B B: the blank separates a genuine repeat
  Tensor c = frames_with_argmax({1, 1, 0, 1}, 3, rng);
  CHECK(ctc_greedy(c) == std::vector<int>{0, 0});
}

TEST_CASE("width-1 beam equals greedy on unique-argmax inputs") {
  vsr::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const int frames = 1 + static_cast<int>(rng.below(6));
    std::vector<int> symbols;
    for (int t = 0; t < frames; ++t)
      symbols.push_back(static_cast<int>(rng.below(4)));
    Tensor lp = frames_with_argmax(symbols, 4, rng);
    const auto nbest = ctc_prefix_beam(lp, 1);
    REQUIRE(!nbest.empty());
    CHECK(nbest[0].tokens == ctc_greedy(lp));
  }
}

TEST_CASE("huge beam matches the exact marginal argmax") {
  vsr::Rng rng(52);
  for (int trial = 0; trial < 12; ++trial) {
    const int frames = 2 + static_cast<int>(rng.below(4));  // up to 5
    const int v = 2 + static_cast<int>(rng.below(2));       // 2..3 classes
    Tensor lp = random_logdist(frames, v + 1, rng);

    // enumerate every label sequence (incl. empty) and its exact marginal
    double best = -1e300;
    std::vector<int> best_seq;
    std::vector<std::vector<int>> stack = {{}};
    for (std::size_t s = 0; s < stack.size(); ++s) {
      std::vector<int> seq = stack[s];
      int repeats = 0;
      for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i] == seq[i - 1]) ++repeats;
      if (static_cast<int>(seq.size()) + repeats <= frames) {
        const double lp_seq = -vsr::ctc_brute_force(lp, seq);
        if (lp_seq > best + 1e-12 ||
            (std::abs(lp_seq - best) <= 1e-12 && seq < best_seq)) {
          best = lp_seq;
          best_seq = seq;
        }
        if (static_cast<int>(seq.size()) < frames)
          for (int c = 0; c < v; ++c) {
            auto grown = seq;
            grown.push_back(c);
            stack.push_back(std::move(grown));
          }
      }
    }

    const auto nbest = ctc_prefix_beam(lp, 4000);
    REQUIRE(!nbest.empty());
    CHECK(std::abs(nbest[0].logprob - best) <= 1e-9);
    CHECK(nbest[0].tokens == best_seq);
  }
}

TEST_CASE("n-best scores are non-increasing and beams are monotone in width") {
  vsr::Rng rng(53);
  Tensor lp = random_logdist(6, 4, rng);
  const auto nbest = ctc_prefix_beam(lp, 16);
  for (std::size_t i = 1; i < nbest.size(); ++i)
    CHECK(nbest[i - 1].logprob >= nbest[i].logprob);

  double prev = -1e300;
  for (int width : {1, 2, 4, 8, 32, 128}) {
    const auto nb = ctc_prefix_beam(lp, width);
    REQUIRE(!nb.empty());
    CHECK(nb[0].logprob >= prev - 1e-12);
    prev = std::max(prev, nb[0].logprob);
  }
}

#include <doctest.h>

#include <cmath>

#include "vsr/losses.hpp"

using vsr::HybridLossConfig;
using vsr::Tape;
using vsr::Tensor;
using vsr::Var;

namespace {

// random valid log-distribution rows
Tensor random_logdist(int rows, int width, vsr::Rng& rng) {
  Tensor t({rows, width});
  for (int r = 0; r < rows; ++r) {
    double mx = -1e9;
    for (int j = 0; j < width; ++j) {
      t.at({r, j}) = rng.uniform(-2.0, 2.0);
      mx = std::max(mx, t.at({r, j}));
    }
    double z = 0.0;
    for (int j = 0; j < width; ++j) z += std::exp(t.at({r, j}) - mx);
    const double lse = mx + std::log(z);
    for (int j = 0; j < width; ++j) t.at({r, j}) -= lse;
  }
  return t;
}

double ctc_forward_value(const Tensor& logprobs, const std::vector<int>& target) {
  Tape t;
  return t.scalar(vsr::ctc_log_likelihood(t, t.constant(logprobs), target));
}

}  // namespace

TEST_CASE("ctc: certain single-label path has zero loss") {
  // T=1, target=[k], probability one on k
  Tensor lp({1, 4});
  for (int j = 0; j < 4; ++j) lp.at({0, j}) = vsr::kNegHuge;
  lp.at({0, 3}) = 0.0;  // class id 2 occupies column 3
  CHECK(ctc_forward_value(lp, {2}) == doctest::Approx(0.0));
}

TEST_CASE("ctc: two uniform frames over blank+2 symbols") {
  // paths {kk, k-, -k} out of 9: p = 1/3
  Tensor lp({2, 3});
  for (auto& v : lp.data) v = std::log(1.0 / 3.0);
  const double loss = ctc_forward_value(lp, {0});
  CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(vsr::ctc_brute_force(lp, {0}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("ctc: forward recursion matches brute force on random instances") {
  vsr::Rng rng(20);
  for (int trial = 0; trial < 60; ++trial) {
    const int frames = 1 + static_cast<int>(rng.below(6));
    const int v = 1 + static_cast<int>(rng.below(4));
    Tensor lp = random_logdist(frames, v + 1, rng);
    const int max_len =
        std::min<int>(3, frames);  // may still be infeasible with repeats
    std::vector<int> target;
    for (int i = 0; i < max_len; ++i)
      target.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))));
    int repeats = 0;
    for (std::size_t i = 1; i < target.size(); ++i)
      if (target[i] == target[i - 1]) ++repeats;
    if (frames < static_cast<int>(target.size()) + repeats) {
      CHECK_THROWS_AS(ctc_forward_value(lp, target), vsr::InfeasibleTarget);
      continue;
    }
    const double fwd = ctc_forward_value(lp, target);
    const double brute = vsr::ctc_brute_force(lp, target);
    CHECK(std::abs(fwd - brute) <= 1e-9);
  }
}

TEST_CASE("ctc gradient matches finite differences") {
  vsr::Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor logits({5, 4});
    for (auto& v : logits.data) v = rng.uniform(-1.0, 1.0);
    std::vector<int> target = {0, 2};
    // drive through log_softmax so perturbed inputs stay valid distributions
    const double err = vsr::grad_check(
        [&](Tape& t) {
          Var lp = t.log_softmax_rows(t.leaf(&logits));
          return vsr::ctc_log_likelihood(t, lp, target);
        },
        {&logits});
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("ctc error contracts") {
  vsr::Rng rng(22);
  Tensor lp = random_logdist(2, 3, rng);
  // too short for the target
  CHECK_THROWS_AS(ctc_forward_value(lp, {0, 1, 0}), vsr::InfeasibleTarget);
  // adjacent repeat needs a separating blank
  CHECK_THROWS_AS(ctc_forward_value(lp, {1, 1}), vsr::InfeasibleTarget);
  // invalid distribution
  Tensor bad = lp;
  bad.at({0, 0}) += 0.1;
  CHECK_THROWS_AS(ctc_forward_value(bad, {0}), vsr::InvalidDistribution);
  // brute force guards
  Tensor big = random_logdist(11, 3, rng);
  CHECK_THROWS_AS(vsr::ctc_brute_force(big, {0}), vsr::TooLarge);
  Tensor wide = random_logdist(9, 42, rng);
  CHECK_THROWS_AS(vsr::ctc_brute_force(wide, {0}), vsr::TooLarge);
}

TEST_CASE("ctc loss ignores columns of non-occurring symbols") {
  vsr::Rng rng(23);
  Tensor lp = random_logdist(5, 5, rng);  // classes 0..3
  const std::vector<int> target = {0};
  const double base = ctc_forward_value(lp, target);
  // swap the columns of classes 2 and 3 (neither occurs in the target)
  Tensor swapped = lp;
  for (int r = 0; r < 5; ++r) {
    std::swap(swapped.at({r, 3}), swapped.at({r, 4}));
  }
  CHECK(ctc_forward_value(swapped, target) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ctc training loss normalizes by target length") {
  vsr::Rng rng(24);
  Tensor lp = random_logdist(6, 4, rng);
  std::vector<int> target = {0, 1, 2};
  Tape t;
  const double raw =
      t.scalar(vsr::ctc_log_likelihood(t, t.constant(lp), target));
  const double norm =
      t.scalar(vsr::ctc_training_loss(t, t.constant(lp), target));
  CHECK(norm == doctest::Approx(raw / 3.0).epsilon(1e-12));
}

TEST_CASE("cross entropy basics") {
  // one-hot correct logits with a large margin
  Tensor logits({2, 5});
  logits.at({0, 1}) = 50.0;
  logits.at({1, 3}) = 50.0;
  Tape t;
  const double near_zero =
      t.scalar(vsr::cross_entropy(t, t.constant(logits), {1, 3}, 0.0));
  CHECK(near_zero == doctest::Approx(0.0).epsilon(1e-12));

  // uniform logits over 41 classes
  Tensor uni({3, 41});
  Tape t2;
  const double lnv =
      t2.scalar(vsr::cross_entropy(t2, t2.constant(uni), {0, 7, 40}, 0.0));
  CHECK(lnv == doctest::Approx(std::log(41.0)).epsilon(1e-12));

  // length mismatch
  Tape t3;
  CHECK_THROWS_AS(vsr::cross_entropy(t3, t3.constant(uni), {0, 1}, 0.0),
                  vsr::LengthMismatch);
}

TEST_CASE("label smoothing matches the direct formula") {
  vsr::Rng rng(25);
  Tensor logits({4, 6});
  for (auto& v : logits.data) v = rng.uniform(-2.0, 2.0);
  std::vector<int> targets = {2, 0, 5, 1};
  const double s = 0.2;
  Tape t;
  const double smoothed =
      t.scalar(vsr::cross_entropy(t, t.constant(logits), targets, s));

  // direct computation: (1-s) * NLL + s * mean-over-classes NLL
  double nll = 0.0, mean_nll = 0.0;
  for (int r = 0; r < 4; ++r) {
    double mx = -1e9;
    for (int j = 0; j < 6; ++j) mx = std::max(mx, logits.at({r, j}));
    double z = 0.0;
    for (int j = 0; j < 6; ++j) z += std::exp(logits.at({r, j}) - mx);
    const double lse = mx + std::log(z);
    nll -= (logits.at({r, targets[static_cast<std::size_t>(r)]}) - lse) / 4.0;
    for (int j = 0; j < 6; ++j)
      mean_nll -= (logits.at({r, j}) - lse) / (4.0 * 6.0);
  }
  CHECK(smoothed ==
        doctest::Approx((1 - s) * nll + s * mean_nll).epsilon(1e-12));

  // gradient sanity with smoothing on
  CHECK(vsr::grad_check(
            [&](Tape& tt) {
              return vsr::cross_entropy(tt, tt.leaf(&logits), targets, s);
            },
            {&logits}) <= 1e-6);
}

TEST_CASE("hybrid loss endpoints, direct value and affinity") {
  HybridLossConfig cfg;
  cfg.alpha = 1.0;
  CHECK(vsr::hybrid_loss(2.0, 4.0, cfg) == 2.0);
  cfg.alpha = 0.0;
  CHECK(vsr::hybrid_loss(2.0, 4.0, cfg) == 4.0);
  cfg.alpha = 0.5;
  CHECK(vsr::hybrid_loss(2.0, 4.0, cfg) == 3.0);

  const double ce = 1.7, ctc = 5.3;
  for (double a : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    cfg.alpha = a;
    const double loss = vsr::hybrid_loss(ce, ctc, cfg);
    CHECK(std::abs(loss - (ctc + a * (ce - ctc))) <= 1e-12);
  }

  cfg.alpha = 1.5;
  CHECK_THROWS_AS(vsr::hybrid_loss(1.0, 1.0, cfg), vsr::AlphaOutOfRange);

  // on-tape version agrees
  cfg.alpha = 0.3;
  Tape t;
  Tensor cet = Tensor::scalar(ce), ctct = Tensor::scalar(ctc);
  const double on_tape = t.scalar(
      vsr::hybrid_loss(t, t.constant(cet), t.constant(ctct), cfg));
  CHECK(on_tape == doctest::Approx(vsr::hybrid_loss(ce, ctc, cfg)));
}

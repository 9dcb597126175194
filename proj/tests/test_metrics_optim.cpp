#include <doctest.h>

#include <cmath>

#include "vsr/metrics.hpp"
#include "vsr/optim.hpp"
#include "vsr/rng.hpp"

using vsr::EditStats;
using vsr::wer;

namespace {

// independent oracle: two-row quadratic DP, distance only
template <typename T>
long long edit_distance_oracle(const std::vector<T>& a,
                               const std::vector<T>& b) {
  std::vector<long long> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    prev[j] = static_cast<long long>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<long long>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const long long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> random_words(int len, vsr::Rng& rng) {
  static const std::vector<std::string> pool = {"A", "B", "C", "D", "E", "F"};
  std::vector<std::string> out;
  for (int i = 0; i < len; ++i)
    out.push_back(pool[rng.below(pool.size())]);
  return out;
}

}  // namespace

TEST_CASE("wer formula cases") {
  const std::vector<std::string> ref = {"THE", "CAT", "SAT"};
  CHECK(wer(ref, ref).second == 0.0);

  // N=10, exactly one substitution, one deletion, one insertion
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back("W" + std::to_string(i));
  std::vector<std::string> hyp = ten;
  hyp[2] = "XX";              // substitution
  hyp.erase(hyp.begin() + 6); // deletion
  hyp.push_back("YY");        // insertion
  const auto [stats, rate] = wer(ten, hyp);
  CHECK(stats.subs == 1);
  CHECK(stats.dels == 1);
  CHECK(stats.ins == 1);
  CHECK(rate == doctest::Approx(0.3).epsilon(1e-15));

  CHECK_THROWS_AS(wer({}, ref), vsr::EmptyReference);
}

TEST_CASE("wer matches the independent DP oracle on 1000 random pairs") {
  vsr::Rng rng(90);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_words(1 + static_cast<int>(rng.below(12)), rng);
    const auto b = random_words(static_cast<int>(rng.below(12)), rng);
    const auto [stats, rate] = wer(a, b);
    CHECK(stats.distance() == edit_distance_oracle(a, b));
    CHECK(stats.subs + stats.dels <= stats.ref_len);
    // argument order flips the rate denominator, not the distance
    if (!b.empty()) {
      const auto [rstats, rrate] = wer(b, a);
      CHECK(rstats.distance() == stats.distance());
    }
  }
}

TEST_CASE("edit distance satisfies the triangle inequality") {
  vsr::Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_words(1 + static_cast<int>(rng.below(8)), rng);
    const auto b = random_words(1 + static_cast<int>(rng.below(8)), rng);
    const auto c = random_words(1 + static_cast<int>(rng.below(8)), rng);
    const auto ab = vsr::edit_align(a, b).distance();
    const auto bc = vsr::edit_align(b, c).distance();
    const auto ac = vsr::edit_align(a, c).distance();
    CHECK(ac <= ab + bc);
  }
}

TEST_CASE("per mirrors wer over phoneme ids") {
  const std::vector<int> ref = {8, 1, 21, 2};  // includes "_"
  CHECK(vsr::per(ref, ref).second == 0.0);
  const auto [stats, rate] = vsr::per(ref, {8, 21, 2});
  CHECK(stats.distance() == 1);
  CHECK(rate == doctest::Approx(0.25));
  CHECK_THROWS_AS(vsr::per({}, ref), vsr::EmptyReference);
}

TEST_CASE("adamw closed forms") {
  using vsr::AdamW;
  using vsr::AdamWConfig;
  using vsr::ParamRegistry;
  using vsr::Tensor;

  // zero gradient: pure decoupled decay scales by (1 - lr*wd)
  Tensor p = Tensor::full({4}, 2.0);
  ParamRegistry reg;
  reg.add("p", &p);
  AdamWConfig cfg;
  cfg.weight_decay = 0.01;
  AdamW opt(reg, cfg);
  p.ensure_grad();
  p.zero_grad();
  opt.step(0.1);
  for (double v : p.data)
    CHECK(v == doctest::Approx(2.0 * (1.0 - 0.001)).epsilon(1e-15));

  // first step with constant gradient and no decay
  Tensor q = Tensor::full({3}, 1.0);
  ParamRegistry reg2;
  reg2.add("q", &q);
  AdamWConfig cfg2;
  cfg2.weight_decay = 0.0;
  AdamW opt2(reg2, cfg2);
  const double g = 0.37;
  q.ensure_grad();
  for (auto& gv : *q.grad) gv = g;
  opt2.step(0.05);
  const double expect = 1.0 - 0.05 * g / (std::abs(g) + cfg2.eps);
  for (double v : q.data) CHECK(v == doctest::Approx(expect).epsilon(1e-12));

  // missing gradient is an error
  Tensor r = Tensor::full({2}, 1.0);
  ParamRegistry reg3;
  reg3.add("r", &r);
  AdamW opt3(reg3, cfg2);
  r.grad.reset();
  CHECK_THROWS_AS(opt3.step(0.1), vsr::ShapeMismatch);
}

TEST_CASE("adamw determinism over repeated runs") {
  using vsr::Tensor;
  auto run = [] {
    vsr::Rng rng(92);
    Tensor p({8});
    vsr::fill_gaussian(p, rng, 1.0);
    vsr::ParamRegistry reg;
    reg.add("p", &p);
    vsr::AdamW opt(reg, {});
    for (int step = 0; step < 10; ++step) {
      p.ensure_grad();
      for (std::size_t i = 0; i < p.data.size(); ++i)
        (*p.grad)[i] = std::sin(0.1 * step + static_cast<double>(i));
      opt.step(0.01);
      p.zero_grad();
    }
    return p.data;
  };
  CHECK(run() == run());
}

TEST_CASE("cosine warmup schedule") {
  using vsr::cosine_warmup_lr;
  const double lr0 = 0.001, lrmin = 1e-6;
  const std::int64_t total = 1000, warm = 100;
  CHECK(cosine_warmup_lr(warm, total, warm, lr0, lrmin) == lr0);
  CHECK(cosine_warmup_lr(total, total, warm, lr0, lrmin) ==
        doctest::Approx(lrmin).epsilon(1e-12));
  // halfway through the decay the cosine term is zero
  CHECK(cosine_warmup_lr(warm + (total - warm) / 2, total, warm, lr0, lrmin) ==
        doctest::Approx((lr0 + lrmin) / 2).epsilon(1e-12));
  CHECK(cosine_warmup_lr(0, total, warm, lr0, lrmin) == 0.0);

  CHECK_THROWS_AS(cosine_warmup_lr(1, 100, 100, lr0, lrmin),
                  vsr::InvalidSchedule);

  // continuity: no step jumps more than the ramp slope or the max cosine slope
  const double bound = lr0 * M_PI / static_cast<double>(total - warm) +
                       lr0 / static_cast<double>(warm);
  for (std::int64_t s = 0; s < total; ++s) {
    const double d = std::abs(cosine_warmup_lr(s + 1, total, warm, lr0, lrmin) -
                              cosine_warmup_lr(s, total, warm, lr0, lrmin));
    CHECK(d <= bound + 1e-15);
  }
}

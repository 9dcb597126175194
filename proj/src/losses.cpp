#include "vsr/losses.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

void HybridLossConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw AlphaOutOfRange("hybrid loss: alpha must lie in [0,1]");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
    throw Error("hybrid loss: label smoothing must lie in [0,1)");
}

namespace {

void check_log_distribution(const Tensor& logprobs) {
  const int width = logprobs.dim(1);
  for (int r = 0; r < logprobs.dim(0); ++r) {
    double sum = 0.0;
    for (int j = 0; j < width; ++j)
      sum += std::exp(logprobs.at({r, j}));
    if (std::abs(sum - 1.0) > 1e-6)
      throw InvalidDistribution("ctc: row " + std::to_string(r) +
                                " exp-sums to " + std::to_string(sum));
  }
}

// blank-interleaved extended target over the logprobs column space
std::vector<int> extend_target(const std::vector<int>& target, int width) {
  std::vector<int> ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(0);
  for (int c : target) {
    if (c < 0 || c + 1 >= width)
      throw ShapeMismatch("ctc: class id out of range");
    ext.push_back(c + 1);
    ext.push_back(0);
  }
  return ext;
}

void check_feasible(const std::vector<int>& target, int frames) {
  int repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++repeats;
  if (frames < static_cast<int>(target.size()) + repeats)
    throw InfeasibleTarget("ctc: " + std::to_string(frames) +
                           " frames cannot carry a target of length " +
                           std::to_string(target.size()) + " with " +
                           std::to_string(repeats) + " adjacent repeats");
}

}  // namespace

Var ctc_log_likelihood(Tape& t, Var logprobs, const std::vector<int>& target) {
  const Tensor& lp = t.val(logprobs);
  check_shape(lp.ndim() == 2 && lp.dim(1) >= 2,
              "ctc: logprobs must be [T,V+1]");
  check_log_distribution(lp);
  const int frames = lp.dim(0);
  check_feasible(target, frames);

  const std::vector<int> ext = extend_target(target, lp.dim(1));
  const int s = static_cast<int>(ext.size());

  // state masks: entry states and the repeat-aware skip transition
  Tensor init({s});
  for (int i = 0; i < s; ++i) init.data[i] = i < 2 ? 0.0 : kNegHuge;
  Tensor skip({s});
  for (int i = 0; i < s; ++i) {
    const bool allowed = i >= 2 && ext[i] != 0 && ext[i] != ext[i - 2];
    skip.data[i] = allowed ? 0.0 : kNegHuge;
  }

  Var z = t.gather_cols(logprobs, ext);  // [T,S]
  Var alpha = t.add_const(t.row(z, 0), init);
  for (int f = 1; f < frames; ++f) {
    Var stay = alpha;
    Var step = t.shift_right(alpha, 1);
    Var leap = t.add_const(t.shift_right(alpha, 2), skip);
    Var merged = t.logaddexp(t.logaddexp(stay, step), leap);
    alpha = t.add(t.row(z, f), merged);
  }

  Var total;
  if (s >= 2) {
    total = t.logaddexp(t.pick(alpha, {s - 1}), t.pick(alpha, {s - 2}));
  } else {
    total = t.pick(alpha, {0});
  }
  return t.neg(total);
}

Var ctc_training_loss(Tape& t, Var logprobs, const std::vector<int>& target) {
  Var nll = ctc_log_likelihood(t, logprobs, target);
  const int l = std::max<int>(1, static_cast<int>(target.size()));
  return t.scale(nll, 1.0 / l);
}

double ctc_brute_force(const Tensor& logprobs, const std::vector<int>& target) {
  check_shape(logprobs.ndim() == 2 && logprobs.dim(1) >= 2,
              "ctc: logprobs must be [T,V+1]");
  const int frames = logprobs.dim(0);
  const int width = logprobs.dim(1);
  if (frames > 10) throw TooLarge("ctc_brute_force: T must be <= 10");
  double paths = 1.0;
  for (int i = 0; i < frames; ++i) paths *= width;
  if (paths > 1e7) throw TooLarge("ctc_brute_force: too many label paths");

  const long long total = static_cast<long long>(paths);
  double sum = 0.0, comp = 0.0;  // Kahan
  std::vector<int> path(static_cast<std::size_t>(frames));
  std::vector<int> collapsed;
  collapsed.reserve(static_cast<std::size_t>(frames));
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = 0; i < frames; ++i) {
      path[static_cast<std::size_t>(i)] = static_cast<int>(c % width);
      c /= width;
    }
    collapsed.clear();
    int prev = -1;
    for (int sym : path) {
      if (sym != prev && sym != 0) collapsed.push_back(sym - 1);
      prev = sym;
    }
    if (collapsed != target) continue;
    double lp = 0.0;
    for (int i = 0; i < frames; ++i)
      lp += logprobs.at({i, path[static_cast<std::size_t>(i)]});
    const double term = std::exp(lp);
    const double y = term - comp;
    const double tt = sum + y;
    comp = (tt - sum) - y;
    sum = tt;
  }
  return -std::log(sum);
}

Var cross_entropy(Tape& t, Var logits, const std::vector<int>& targets,
                  double smoothing) {
  const Tensor& lv = t.val(logits);
  check_shape(lv.ndim() == 2, "cross_entropy: logits must be [L,V]");
  if (static_cast<int>(targets.size()) != lv.dim(0))
    throw LengthMismatch("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(lv.dim(0)) +
                         " logit rows");
  if (!(smoothing >= 0.0 && smoothing < 1.0))
    throw Error("cross_entropy: smoothing must lie in [0,1)");
  Var lsm = t.log_softmax_rows(logits);
  Var picked = t.mean_all(t.gather_rowwise(lsm, targets));
  if (smoothing == 0.0) return t.neg(picked);
  Var smooth = t.mean_all(lsm);
  return t.neg(t.add(t.scale(picked, 1.0 - smoothing),
                     t.scale(smooth, smoothing)));
}

Var hybrid_loss(Tape& t, Var ce, Var ctc, const HybridLossConfig& cfg) {
  cfg.validate();
  return t.add(t.scale(ce, cfg.alpha), t.scale(ctc, 1.0 - cfg.alpha));
}

double hybrid_loss(double ce, double ctc, const HybridLossConfig& cfg) {
  cfg.validate();
  return cfg.alpha * ce + (1.0 - cfg.alpha) * ctc;
}

}  // namespace vsr

#ifndef VSR_LOSSES_HPP
#define VSR_LOSSES_HPP

#include <vector>

#include "vsr/tape.hpp"

namespace vsr {

struct HybridLossConfig {
  double alpha = 0.9;          // weight on the cross-entropy head
  double label_smoothing = 0.0;

  void validate() const;
};

// -log p(target | logprobs) via the forward recursion over the
// blank-interleaved extended target, in log space, on the tape (so gradients
// come from reverse mode). logprobs rows are [blank | classes] and must be
// valid log-distributions; target entries are class ids (0-based, blank
// excluded). Throws InfeasibleTarget when T < L + adjacent-repeat count and
// InvalidDistribution when a row's exp-sum strays from 1 by more than 1e-6.
Var ctc_log_likelihood(Tape& t, Var logprobs, const std::vector<int>& target);

// Independent enumeration oracle: sums the probability of every frame label
// path that collapses to the target. Guarded by TooLarge (T > 10 or more
// than 1e7 paths). Not differentiable; compensated summation in probability
// space keeps the log-domain error well under 1e-9.
double ctc_brute_force(const Tensor& logprobs, const std::vector<int>& target);

// Per-sequence CTC training loss: ctc_log_likelihood / max(1, target length).
Var ctc_training_loss(Tape& t, Var logprobs, const std::vector<int>& target);

// Mean token-level negative log-likelihood with optional uniform label
// smoothing; targets index the logits columns and must include the terminator
// the model is trained to emit.
Var cross_entropy(Tape& t, Var logits, const std::vector<int>& targets,
                  double smoothing = 0.0);

// alpha * ce + (1 - alpha) * ctc
Var hybrid_loss(Tape& t, Var ce, Var ctc, const HybridLossConfig& cfg);
double hybrid_loss(double ce, double ctc, const HybridLossConfig& cfg);

}  // namespace vsr

#endif  // VSR_LOSSES_HPP

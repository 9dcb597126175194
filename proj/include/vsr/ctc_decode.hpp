#ifndef VSR_CTC_DECODE_HPP
#define VSR_CTC_DECODE_HPP

#include <vector>

#include "vsr/tensor.hpp"

namespace vsr {

// Frame-wise argmax, collapse adjacent repeats, drop blanks. logprobs rows
// are [blank | classes]; returns class ids.
std::vector<int> ctc_greedy(const Tensor& logprobs);

struct CtcNBestEntry {
  std::vector<int> tokens;  // class ids
  double logprob;           // total (blank + non-blank) prefix mass
};

// Standard prefix beam search merging blank/non-blank mass per prefix.
// Deterministic: prefixes are kept in lexicographic order and ties break
// toward the lexicographically smaller token sequence. Returns up to
// beam_width entries sorted by descending log-probability.
std::vector<CtcNBestEntry> ctc_prefix_beam(const Tensor& logprobs,
                                           int beam_width);

}  // namespace vsr

#endif  // VSR_CTC_DECODE_HPP

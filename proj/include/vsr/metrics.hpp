#ifndef VSR_METRICS_HPP
#define VSR_METRICS_HPP

#include <string>
#include <vector>

#include "vsr/errors.hpp"

namespace vsr {

// Minimal-cost alignment counts under unit costs. Ties in the DP backtrace
// prefer substitution over an insertion+deletion pair, which affects only
// the S/D/I split, never S+D+I.
struct EditStats {
  long long subs = 0;
  long long dels = 0;
  long long ins = 0;
  long long ref_len = 0;

  long long distance() const { return subs + dels + ins; }
  double rate() const { return static_cast<double>(distance()) / ref_len; }
};

template <typename Token>
EditStats edit_align(const std::vector<Token>& ref,
                     const std::vector<Token>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<long long>> d(n + 1,
                                        std::vector<long long>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<long long>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<long long>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const long long sub =
          d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  EditStats stats;
  stats.ref_len = static_cast<long long>(n);
  // backtrace, diagonal first so ties resolve to substitutions
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (!(ref[i - 1] == hyp[j - 1])) ++stats.subs;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++stats.dels;
      --i;
    } else {
      ++stats.ins;
      --j;
    }
  }
  return stats;
}

// Word error rate, (S+D+I)/N; N is the reference length and the rate may
// exceed 1. Throws EmptyReference when the reference is empty.
std::pair<EditStats, double> wer(const std::vector<std::string>& reference,
                                 const std::vector<std::string>& hypothesis);

// phoneme-level analog over vocabulary ids ("_" counts as a token)
std::pair<EditStats, double> per(const std::vector<int>& reference,
                                 const std::vector<int>& hypothesis);

}  // namespace vsr

#endif  // VSR_METRICS_HPP

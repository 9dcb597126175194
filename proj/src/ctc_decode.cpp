#include "vsr/ctc_decode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vsr/errors.hpp"
#include "vsr/tape.hpp"

namespace vsr {

namespace {

double lse(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  if (hi <= kNegHuge) return kNegHuge;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

std::vector<int> ctc_greedy(const Tensor& logprobs) {
  check_shape(logprobs.ndim() == 2 && logprobs.dim(1) >= 2,
              "ctc_greedy: logprobs must be [T,V+1]");
  std::vector<int> out;
  int prev = -1;
  for (int t = 0; t < logprobs.dim(0); ++t) {
    int best = 0;
    for (int j = 1; j < logprobs.dim(1); ++j)
      if (logprobs.at({t, j}) > logprobs.at({t, best})) best = j;
    if (best != prev && best != 0) out.push_back(best - 1);
    prev = best;
  }
  return out;
}

std::vector<CtcNBestEntry> ctc_prefix_beam(const Tensor& logprobs,
                                           int beam_width) {
  check_shape(logprobs.ndim() == 2 && logprobs.dim(1) >= 2,
              "ctc_prefix_beam: logprobs must be [T,V+1]");
  if (beam_width < 1) throw Error("ctc_prefix_beam: beam width must be >= 1");
  const int frames = logprobs.dim(0);
  const int width = logprobs.dim(1);

  struct Mass {
    double blank = kNegHuge;     // paths ending in blank
    double nonblank = kNegHuge;  // paths ending in the prefix's last symbol
    double total() const { return lse_free(blank, nonblank); }
    static double lse_free(double a, double b) {
      const double hi = std::max(a, b), lo = std::min(a, b);
      if (hi <= kNegHuge) return kNegHuge;
      return hi + std::log1p(std::exp(lo - hi));
    }
  };

  // std::map keeps prefix iteration deterministic
  std::map<std::vector<int>, Mass> beams;
  beams[{}] = {0.0, kNegHuge};

  for (int t = 0; t < frames; ++t) {
    std::map<std::vector<int>, Mass> next;
    for (const auto& [prefix, mass] : beams) {
      const double ptot = mass.total();
      // blank keeps the prefix
      {
        const double p = logprobs.at({t, 0});
        Mass& m = next[prefix];
        m.blank = lse(m.blank, p + ptot);
      }
      for (int sym = 1; sym < width; ++sym) {
        const double p = logprobs.at({t, sym});
        const int cls = sym - 1;
        if (!prefix.empty() && prefix.back() == cls) {
          // same symbol: repeat collapses unless a blank separated it
          Mass& same = next[prefix];
          same.nonblank = lse(same.nonblank, p + mass.nonblank);
          std::vector<int> grown = prefix;
          grown.push_back(cls);
          Mass& g = next[grown];
          g.nonblank = lse(g.nonblank, p + mass.blank);
        } else {
          std::vector<int> grown = prefix;
          grown.push_back(cls);
          Mass& g = next[grown];
          g.nonblank = lse(g.nonblank, p + ptot);
        }
      }
    }
    if (static_cast<int>(next.size()) > beam_width) {
      std::vector<std::pair<double, const std::vector<int>*>> ranked;
      ranked.reserve(next.size());
      for (const auto& [prefix, mass] : next)
        ranked.emplace_back(mass.total(), &prefix);
      // sort by score descending; map order makes equal scores resolve to the
      // lexicographically smaller prefix
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) {
                         return a.first > b.first;
                       });
      std::map<std::vector<int>, Mass> pruned;
      for (int i = 0; i < beam_width; ++i)
        pruned[*ranked[static_cast<std::size_t>(i)].second] =
            next[*ranked[static_cast<std::size_t>(i)].second];
      next = std::move(pruned);
    }
    beams = std::move(next);
  }

  std::vector<CtcNBestEntry> out;
  out.reserve(beams.size());
  for (const auto& [prefix, mass] : beams)
    out.push_back({prefix, mass.total()});
  std::stable_sort(out.begin(), out.end(),
                   [](const CtcNBestEntry& a, const CtcNBestEntry& b) {
                     return a.logprob > b.logprob;
                   });
  if (static_cast<int>(out.size()) > beam_width)
    out.resize(static_cast<std::size_t>(beam_width));
  return out;
}

}  // namespace vsr

#include "vsr/metrics.hpp"

namespace vsr {

std::pair<EditStats, double> wer(const std::vector<std::string>& reference,
                                 const std::vector<std::string>& hypothesis) {
  if (reference.empty()) throw EmptyReference("wer: empty reference");
  EditStats stats = edit_align(reference, hypothesis);
  return {stats, stats.rate()};
}

std::pair<EditStats, double> per(const std::vector<int>& reference,
                                 const std::vector<int>& hypothesis) {
  if (reference.empty()) throw EmptyReference("per: empty reference");
  EditStats stats = edit_align(reference, hypothesis);
  return {stats, stats.rate()};
}

}  // namespace vsr

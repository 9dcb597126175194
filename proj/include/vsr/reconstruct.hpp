#ifndef VSR_RECONSTRUCT_HPP
#define VSR_RECONSTRUCT_HPP

#include <map>
#include <string>
#include <vector>

#include "vsr/lm.hpp"
#include "vsr/text.hpp"

namespace vsr {

// Optional per-pair substitution costs (log-penalty units, <= 0); pairs not
// listed fall back to the flat sub_cost. Symmetric by construction.
class ConfusionTable {
 public:
  void set_pair(int a, int b, double cost);
  double cost(int a, int b, double fallback) const;

 private:
  std::map<std::pair<int, int>, double> costs_;
};

struct ReconstructParams {
  int beam_width = 8;
  double sub_cost = -1.0;   // pronunciation token replaced in the input
  double ins_cost = -1.5;   // spurious input token absorbed by a word
  double del_cost = -1.5;   // pronunciation token missing from the input
  double lm_weight = 1.0;
  double word_bonus = 0.5;  // counters the LM's preference for short outputs
  int max_span_slack = 6;   // extra input tokens one word may absorb
  const ConfusionTable* confusion = nullptr;
};

struct ReconstructHyp {
  std::vector<std::string> words;
  double edit_penalty = 0.0;  // sum of sub/ins/del penalties, <= 0
  double lm_logprob = 0.0;    // includes the </s> term
  double total = 0.0;         // edit + lm_weight*lm + word_bonus*|words|
};

// Beam search over word sequences whose pronunciations align to consumed
// spans of the input under weighted edit distance. Word-boundary tokens in
// the input are consumed free at word boundaries (a soft alignment hint) and
// cost ins_cost inside a word. The i-th entry of the result is the i-th best
// hypothesis; entry 0 is the decode.
std::vector<ReconstructHyp> reconstruct(const std::vector<int>& phonemes,
                                        const Lexicon& lexicon,
                                        const NGramLM& lm,
                                        const ReconstructParams& params);

// Recomputes a hypothesis' total from its components (LM score from scratch);
// must agree with the incrementally maintained total.
double score_hypothesis(const ReconstructHyp& hyp, const NGramLM& lm,
                        const ReconstructParams& params);

}  // namespace vsr

#endif  // VSR_RECONSTRUCT_HPP

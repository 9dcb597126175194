#ifndef VSR_LM_HPP
#define VSR_LM_HPP

#include <map>
#include <string>
#include <vector>

namespace vsr {

// Backoff n-gram language model over words. Probabilities are kept in
// natural log; ARPA files use log10 on disk as usual. Estimation is
// interpolated absolute discounting, which keeps every context's
// distribution normalized over vocabulary + OOV mass by construction.
class NGramLM {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  NGramLM() = default;

  // corpus: sentences as word lists (no <s>/</s>). Throws EmptyCorpus.
  static NGramLM estimate(const std::vector<std::vector<std::string>>& corpus,
                          int order, double discount = 0.75);

  static NGramLM load_arpa(const std::string& path);
  void save_arpa(const std::string& path) const;

  int order() const { return order_; }

  // natural-log p(word | context); OOV words score as <unk>
  double log_prob(const std::vector<std::string>& context,
                  const std::string& word) const;

  // sum over log p(w_i | <s>, w_1..w_{i-1}) plus the </s> term
  double sentence_log_prob(const std::vector<std::string>& words) const;

  // predictable tokens: vocabulary without <s>, including </s> and <unk>
  std::vector<std::string> predictable_tokens() const;

  // test hook: exp-sum of p(. | context) over predictable tokens
  double context_prob_sum(const std::vector<std::string>& context) const;

  bool contains(const std::string& word) const { return word_id(word) >= 0; }

 private:
  int word_id(const std::string& w) const;
  int word_id_or_unk(const std::string& w) const;
  double log_prob_ids(std::vector<int> context, int word) const;

  int order_ = 0;
  std::vector<std::string> vocab_;
  std::map<std::string, int> index_;
  // key: n-gram / context as id sequences
  std::vector<std::map<std::vector<int>, double>> probs_;  // [k-1] for k-grams
  std::vector<std::map<std::vector<int>, double>> bows_;   // backoff weights
};

}  // namespace vsr

#endif  // VSR_LM_HPP

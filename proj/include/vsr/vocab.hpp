#ifndef VSR_VOCAB_HPP
#define VSR_VOCAB_HPP

#include <string>
#include <vector>

namespace vsr {

// 41-token phoneme inventory: <unk>, the word-boundary token "_", and the 39
// ARPAbet phonemes. Index layout is fixed; everything downstream (CTC rows,
// decoder embeddings, file formats) depends on it.
class PhonemeVocab {
 public:
  PhonemeVocab();

  static constexpr int kUnk = 0;
  static constexpr int kBoundary = 1;
  static constexpr int kSize = 41;

  int size() const { return kSize; }
  const std::string& token(int id) const;
  // -1 when the token is not in the inventory
  int id(const std::string& token) const;
  bool is_phoneme(int id) const { return id >= 2 && id < kSize; }

  const std::vector<std::string>& tokens() const { return tokens_; }

  std::string join(const std::vector<int>& seq) const;
  // throws ParseError on an unknown token
  std::vector<int> parse(const std::string& line) const;

 private:
  std::vector<std::string> tokens_;
};

const PhonemeVocab& phoneme_vocab();

// Index layout of the combined symbol table used by the two stage-1 heads:
// CTC rows are [blank | 41 vocab tokens]; the decoder embeds the same ids
// plus BOS/EOS sentinels that never appear in emitted phoneme output.
namespace symbols {
constexpr int kCtcBlank = 0;
constexpr int kCtcWidth = PhonemeVocab::kSize + 1;  // 42
constexpr int kBos = 42;
constexpr int kEos = 43;
constexpr int kDecoderTable = 44;
inline int from_vocab(int vocab_id) { return vocab_id + 1; }
inline int to_vocab(int symbol) { return symbol - 1; }
}  // namespace symbols

}  // namespace vsr

#endif  // VSR_VOCAB_HPP

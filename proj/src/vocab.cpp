#include "vsr/vocab.hpp"

#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

PhonemeVocab::PhonemeVocab() {
  tokens_ = {"<unk>", "_",  "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH",
             "D",     "DH", "EH", "ER", "EY", "F",  "G",  "HH", "IH", "IY",
             "JH",    "K",  "L",  "M",  "N",  "NG", "OW", "OY", "P",  "R",
             "S",     "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",
             "ZH"};
}

const std::string& PhonemeVocab::token(int id) const {
  return tokens_[static_cast<std::size_t>(id)];
}

int PhonemeVocab::id(const std::string& token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i] == token) return static_cast<int>(i);
  return -1;
}

std::string PhonemeVocab::join(const std::vector<int>& seq) const {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += token(seq[i]);
  }
  return out;
}

std::vector<int> PhonemeVocab::parse(const std::string& line) const {
  std::vector<int> seq;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const int i = id(tok);
    if (i < 0) throw ParseError("unknown phoneme token: " + tok);
    seq.push_back(i);
  }
  return seq;
}

const PhonemeVocab& phoneme_vocab() {
  static const PhonemeVocab vocab;
  return vocab;
}

}  // namespace vsr

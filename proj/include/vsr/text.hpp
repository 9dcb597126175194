#ifndef VSR_TEXT_HPP
#define VSR_TEXT_HPP

#include <map>
#include <string>
#include <vector>

#include "vsr/vocab.hpp"

namespace vsr {

// Lite text normalization: uppercase, apostrophes kept, all other
// punctuation stripped, whitespace collapsed. Digits are rejected
// (ContainsDigits) since number verbalization is out of scope.
std::vector<std::string> normalize_text(const std::string& raw);

// Word -> pronunciations over the phoneme inventory ("_" never appears in a
// pronunciation). Duplicate words are alternate pronunciations; file order
// is preserved and the first entry is the default.
class Lexicon {
 public:
  void add(const std::string& word, const std::vector<int>& pron);

  // file format: one "WORD PH1 PH2 ..." entry per line, '#' comments
  static Lexicon load(const std::string& path);
  void save(const std::string& path) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& word) const;
  const std::vector<int>* first_pron(const std::string& word) const;
  std::vector<const std::vector<int>*> prons(const std::string& word) const;
  const std::vector<std::pair<std::string, std::vector<int>>>& entries() const {
    return entries_;
  }
  std::vector<std::string> words() const;

 private:
  std::vector<std::pair<std::string, std::vector<int>>> entries_;
  std::map<std::string, std::vector<std::size_t>> index_;
};

// First-listed pronunciations joined with the word-boundary token; an OOV
// word contributes a single <unk> token.
std::vector<int> g2p(const std::vector<std::string>& words, const Lexicon& lex);

}  // namespace vsr

#endif  // VSR_TEXT_HPP

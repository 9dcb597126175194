#include "vsr/text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

std::vector<std::string> normalize_text(const std::string& raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (unsigned char c : raw) {
    if (std::isdigit(c))
      throw ContainsDigits("normalize_text: digits cannot be verbalized: '" +
                           raw + "'");
    if (std::isalpha(c)) {
      cleaned.push_back(static_cast<char>(std::toupper(c)));
    } else if (c == '\'') {
      cleaned.push_back('\'');
    } else {
      cleaned.push_back(' ');
    }
  }
  std::vector<std::string> words;
  std::istringstream is(cleaned);
  std::string w;
  while (is >> w) {
    // strip apostrophes that do not sit inside a word
    while (!w.empty() && w.front() == '\'') w.erase(w.begin());
    while (!w.empty() && w.back() == '\'') w.pop_back();
    if (!w.empty()) words.push_back(w);
  }
  return words;
}

void Lexicon::add(const std::string& word, const std::vector<int>& pron) {
  const auto& vocab = phoneme_vocab();
  for (int p : pron)
    if (!vocab.is_phoneme(p))
      throw ParseError("lexicon: pronunciation of '" + word +
                       "' contains a non-phoneme token");
  index_[word].push_back(entries_.size());
  entries_.emplace_back(word, pron);
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("lexicon not found: " + path);
  Lexicon lex;
  std::string line;
  int line_no = 0;
  const auto& vocab = phoneme_vocab();
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    std::string word;
    if (!(is >> word)) continue;
    std::vector<int> pron;
    std::string tok;
    while (is >> tok) {
      const int id = vocab.id(tok);
      if (id < 0 || !vocab.is_phoneme(id))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": bad phoneme '" + tok + "'");
      pron.push_back(id);
    }
    if (pron.empty())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": entry has no pronunciation");
    lex.add(word, pron);
  }
  return lex;
}

void Lexicon::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write lexicon: " + path);
  const auto& vocab = phoneme_vocab();
  for (const auto& [word, pron] : entries_) {
    out << word;
    for (int p : pron) out << ' ' << vocab.token(p);
    out << '\n';
  }
}

bool Lexicon::contains(const std::string& word) const {
  return index_.find(word) != index_.end();
}

const std::vector<int>* Lexicon::first_pron(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return nullptr;
  return &entries_[it->second.front()].second;
}

std::vector<const std::vector<int>*> Lexicon::prons(
    const std::string& word) const {
  std::vector<const std::vector<int>*> out;
  const auto it = index_.find(word);
  if (it == index_.end()) return out;
  for (std::size_t e : it->second) out.push_back(&entries_[e].second);
  return out;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  for (const auto& [word, idxs] : index_) out.push_back(word);
  return out;
}

std::vector<int> g2p(const std::vector<std::string>& words,
                     const Lexicon& lex) {
  std::vector<int> seq;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) seq.push_back(PhonemeVocab::kBoundary);
    const std::vector<int>* pron = lex.first_pron(words[i]);
    if (pron == nullptr) {
      seq.push_back(PhonemeVocab::kUnk);
    } else {
      seq.insert(seq.end(), pron->begin(), pron->end());
    }
  }
  return seq;
}

}  // namespace vsr

#include "vsr/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

namespace {
constexpr double kLn10 = 2.302585092994046;
constexpr double kLogZero = -99.0 * kLn10;  // ARPA pseudo-zero, natural log
}  // namespace

int NGramLM::word_id(const std::string& w) const {
  const auto it = index_.find(w);
  return it == index_.end() ? -1 : it->second;
}

int NGramLM::word_id_or_unk(const std::string& w) const {
  const int id = word_id(w);
  return id >= 0 ? id : word_id(kUnk);
}

NGramLM NGramLM::estimate(const std::vector<std::vector<std::string>>& corpus,
                          int order, double discount) {
  if (order < 1) throw Error("ngram: order must be >= 1");
  if (!(discount > 0.0 && discount < 1.0))
    throw Error("ngram: discount must lie in (0,1)");
  if (corpus.empty()) throw EmptyCorpus("ngram: empty corpus");

  NGramLM lm;
  lm.order_ = order;
  lm.vocab_ = {kUnk, kBos, kEos};
  for (const auto& sentence : corpus)
    for (const auto& w : sentence)
      if (std::find(lm.vocab_.begin(), lm.vocab_.end(), w) == lm.vocab_.end())
        lm.vocab_.push_back(w);
  for (std::size_t i = 0; i < lm.vocab_.size(); ++i)
    lm.index_[lm.vocab_[i]] = static_cast<int>(i);

  const int unk = 0, bos = 1, eos = 2;

  // n-gram counts per order
  std::vector<std::map<std::vector<int>, long long>> counts(
      static_cast<std::size_t>(order));
  for (const auto& sentence : corpus) {
    std::vector<int> ids;
    ids.push_back(bos);
    for (const auto& w : sentence) ids.push_back(lm.word_id(w));
    ids.push_back(eos);
    for (int k = 1; k <= order; ++k)
      for (std::size_t s = 0; s + static_cast<std::size_t>(k) <= ids.size(); ++s) {
        std::vector<int> gram(ids.begin() + static_cast<long>(s),
                              ids.begin() + static_cast<long>(s) + k);
        if (k == 1 && gram[0] == bos) continue;  // <s> is context only
        ++counts[static_cast<std::size_t>(k - 1)][gram];
      }
  }

  lm.probs_.assign(static_cast<std::size_t>(order), {});
  lm.bows_.assign(static_cast<std::size_t>(order), {});

  // unigrams: interpolate with the uniform distribution over observed event
  // types + the <unk> slot
  {
    const auto& uni = counts[0];
    long long total = 0;
    for (const auto& [gram, c] : uni) total += c;
    const long long types = static_cast<long long>(uni.size());
    const double punif = 1.0 / (static_cast<double>(types) + 1.0);
    const double lambda = discount * static_cast<double>(types) /
                          static_cast<double>(total);
    for (const auto& [gram, c] : uni) {
      const double p =
          (std::max(static_cast<double>(c) - discount, 0.0)) / total +
          lambda * punif;
      lm.probs_[0][gram] = std::log(p);
    }
    lm.probs_[0][{unk}] = std::log(lambda * punif);
    lm.probs_[0][{bos}] = kLogZero;  // never predicted
  }

  // higher orders: discounted counts, interpolated with the lower order
  for (int k = 2; k <= order; ++k) {
    const auto& grams = counts[static_cast<std::size_t>(k - 1)];
    std::map<std::vector<int>, long long> ctx_total;
    std::map<std::vector<int>, long long> ctx_types;
    for (const auto& [gram, c] : grams) {
      std::vector<int> ctx(gram.begin(), gram.end() - 1);
      ctx_total[ctx] += c;
      ctx_types[ctx] += 1;
    }
    for (const auto& [ctx, total] : ctx_total) {
      const double bow = discount *
                         static_cast<double>(ctx_types[ctx]) /
                         static_cast<double>(total);
      lm.bows_[static_cast<std::size_t>(k - 2)][ctx] = std::log(bow);
    }
    for (const auto& [gram, c] : grams) {
      std::vector<int> ctx(gram.begin(), gram.end() - 1);
      std::vector<int> rest(gram.begin() + 1, gram.end());
      const double total = static_cast<double>(ctx_total[ctx]);
      const double bow = std::exp(lm.bows_[static_cast<std::size_t>(k - 2)][ctx]);
      const double lower = std::exp(lm.log_prob_ids(
          std::vector<int>(rest.begin(), rest.end() - 1), gram.back()));
      const double p =
          std::max(static_cast<double>(c) - discount, 0.0) / total +
          bow * lower;
      lm.probs_[static_cast<std::size_t>(k - 1)][gram] = std::log(p);
    }
  }
  return lm;
}

double NGramLM::log_prob_ids(std::vector<int> context, int word) const {
  // trim to the model's context length
  if (static_cast<int>(context.size()) > order_ - 1)
    context.erase(context.begin(),
                  context.end() - (order_ - 1));
  double backoff = 0.0;
  for (;;) {
    const int k = static_cast<int>(context.size()) + 1;
    std::vector<int> gram = context;
    gram.push_back(word);
    const auto& table = probs_[static_cast<std::size_t>(k - 1)];
    const auto it = table.find(gram);
    if (it != table.end()) return backoff + it->second;
    if (context.empty()) return backoff + kLogZero;  // unseen unigram
    const auto& bow_table = bows_[static_cast<std::size_t>(k - 2)];
    const auto bit = bow_table.find(context);
    if (bit != bow_table.end()) backoff += bit->second;
    context.erase(context.begin());
  }
}

double NGramLM::log_prob(const std::vector<std::string>& context,
                         const std::string& word) const {
  std::vector<int> ctx;
  for (const auto& w : context) ctx.push_back(word_id_or_unk(w));
  return log_prob_ids(std::move(ctx), word_id_or_unk(word));
}

double NGramLM::sentence_log_prob(const std::vector<std::string>& words) const {
  std::vector<std::string> ctx{kBos};
  double total = 0.0;
  for (const auto& w : words) {
    total += log_prob(ctx, w);
    ctx.push_back(w);
  }
  total += log_prob(ctx, kEos);
  return total;
}

std::vector<std::string> NGramLM::predictable_tokens() const {
  std::vector<std::string> out;
  for (const auto& w : vocab_)
    if (w != kBos) out.push_back(w);
  return out;
}

double NGramLM::context_prob_sum(
    const std::vector<std::string>& context) const {
  double sum = 0.0;
  for (const auto& w : predictable_tokens())
    sum += std::exp(log_prob(context, w));
  return sum;
}

void NGramLM::save_arpa(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write ARPA file: " + path);
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k)
    out << "ngram " << k << "="
        << probs_[static_cast<std::size_t>(k - 1)].size() << "\n";
  char buf[64];
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto& [gram, lp] : probs_[static_cast<std::size_t>(k - 1)]) {
      std::snprintf(buf, sizeof buf, "%.17g", lp / kLn10);
      out << buf;
      for (std::size_t i = 0; i < gram.size(); ++i)
        out << (i == 0 ? '\t' : ' ')
            << vocab_[static_cast<std::size_t>(gram[i])];
      if (k < order_) {
        const auto bit = bows_[static_cast<std::size_t>(k - 1)].find(gram);
        if (bit != bows_[static_cast<std::size_t>(k - 1)].end()) {
          std::snprintf(buf, sizeof buf, "%.17g", bit->second / kLn10);
          out << "\t" << buf;
        }
      }
      out << "\n";
    }
  }
  out << "\n\\end\\\n";
}

NGramLM NGramLM::load_arpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("ARPA file not found: " + path);
  NGramLM lm;
  std::string line;
  int line_no = 0;
  int section = 0;  // current k, 0 = outside
  std::vector<long long> declared;
  auto fail = [&](const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
  };

  auto intern = [&lm](const std::string& w) {
    const auto it = lm.index_.find(w);
    if (it != lm.index_.end()) return it->second;
    const int id = static_cast<int>(lm.vocab_.size());
    lm.vocab_.push_back(w);
    lm.index_[w] = id;
    return id;
  };
  intern(kUnk);
  intern(kBos);
  intern(kEos);

  bool in_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    if (line == "\\data\\") {
      in_data = true;
      continue;
    }
    if (line == "\\end\\") break;
    if (line.size() > 1 && line[0] == '\\') {
      // \k-grams:
      int k = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &k) != 1 || k < 1)
        fail("unrecognized section header '" + line + "'");
      if (k > static_cast<int>(declared.size()))
        fail("section order exceeds declared counts");
      section = k;
      continue;
    }
    if (in_data && section == 0) {
      int k = 0;
      long long n = 0;
      if (std::sscanf(line.c_str(), "ngram %d=%lld", &k, &n) != 2)
        fail("expected 'ngram k=count'");
      if (k != static_cast<int>(declared.size()) + 1)
        fail("ngram counts must be declared in order");
      declared.push_back(n);
      lm.order_ = k;
      lm.probs_.emplace_back();
      lm.bows_.emplace_back();
      continue;
    }
    if (section == 0) fail("entry outside any section");
    std::istringstream is(line);
    double lp;
    if (!(is >> lp)) fail("expected a log10 probability");
    std::vector<int> gram;
    std::string tok;
    for (int i = 0; i < section; ++i) {
      if (!(is >> tok)) fail("truncated n-gram entry");
      gram.push_back(intern(tok));
    }
    lm.probs_[static_cast<std::size_t>(section - 1)][gram] = lp * kLn10;
    double bow;
    if (is >> bow)
      lm.bows_[static_cast<std::size_t>(section - 1)][gram] = bow * kLn10;
  }
  if (lm.order_ == 0) throw ParseError(path + ": no \\data\\ section found");
  for (int k = 1; k <= lm.order_; ++k)
    if (static_cast<long long>(lm.probs_[static_cast<std::size_t>(k - 1)].size()) !=
        declared[static_cast<std::size_t>(k - 1)])
      throw ParseError(path + ": ngram " + std::to_string(k) +
                       " count mismatch");
  return lm;
}

}  // namespace vsr

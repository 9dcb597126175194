#include "vsr/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

void ConfusionTable::set_pair(int a, int b, double cost) {
  costs_[{std::min(a, b), std::max(a, b)}] = cost;
}

double ConfusionTable::cost(int a, int b, double fallback) const {
  const auto it = costs_.find({std::min(a, b), std::max(a, b)});
  return it == costs_.end() ? fallback : it->second;
}

namespace {

constexpr double kForbidden = -1e30;

double sub_cost_of(const ReconstructParams& p, int pron_tok, int input_tok) {
  if (input_tok == pron_tok) return 0.0;
  if (input_tok == PhonemeVocab::kBoundary) return kForbidden;
  if (p.confusion) return p.confusion->cost(pron_tok, input_tok, p.sub_cost);
  return p.sub_cost;
}

// best alignment penalty of pron against input[start..start+span) for every
// span in [0, max_span]; returns the D[pron_len][span] row of the edit DP
std::vector<double> span_penalties(const std::vector<int>& pron,
                                   const std::vector<int>& input, int start,
                                   int max_span,
                                   const ReconstructParams& params) {
  const int pl = static_cast<int>(pron.size());
  std::vector<std::vector<double>> d(
      static_cast<std::size_t>(pl) + 1,
      std::vector<double>(static_cast<std::size_t>(max_span) + 1, kForbidden));
  d[0][0] = 0.0;
  for (int j = 1; j <= max_span; ++j)
    d[0][static_cast<std::size_t>(j)] =
        d[0][static_cast<std::size_t>(j - 1)] + params.ins_cost;
  for (int i = 1; i <= pl; ++i)
    d[static_cast<std::size_t>(i)][0] =
        d[static_cast<std::size_t>(i - 1)][0] + params.del_cost;
  for (int i = 1; i <= pl; ++i) {
    for (int j = 1; j <= max_span; ++j) {
      const int tok = input[static_cast<std::size_t>(start + j - 1)];
      double best = d[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] +
                    params.del_cost;
      best = std::max(best,
                      d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] +
                          params.ins_cost);
      best = std::max(
          best, d[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
                    sub_cost_of(params, pron[static_cast<std::size_t>(i - 1)], tok));
      d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = best;
    }
  }
  return d[static_cast<std::size_t>(pl)];
}

int skip_boundaries(const std::vector<int>& input, int pos) {
  while (pos < static_cast<int>(input.size()) &&
         input[static_cast<std::size_t>(pos)] == PhonemeVocab::kBoundary)
    ++pos;
  return pos;
}

struct State {
  std::vector<std::string> words;
  double edit = 0.0;
  double lm = 0.0;
  double total = 0.0;
};

bool better(const State& a, const State& b) {
  if (a.total != b.total) return a.total > b.total;
  return a.words < b.words;  // deterministic tie-break
}

}  // namespace

std::vector<ReconstructHyp> reconstruct(const std::vector<int>& phonemes,
                                        const Lexicon& lexicon,
                                        const NGramLM& lm,
                                        const ReconstructParams& params) {
  if (phonemes.empty()) throw EmptyInput("reconstruct: empty phoneme input");
  if (lexicon.empty()) throw EmptyLexicon("reconstruct: empty lexicon");
  if (params.beam_width < 1)
    throw Error("reconstruct: beam width must be >= 1");

  const int n = static_cast<int>(phonemes.size());
  // layers[pos]: best partial hypotheses having consumed exactly pos tokens,
  // with pos normalized past free boundary tokens
  std::vector<std::vector<State>> layers(static_cast<std::size_t>(n) + 1);
  const int start = skip_boundaries(phonemes, 0);
  layers[static_cast<std::size_t>(start)].push_back({});

  const auto lex_words = lexicon.words();
  std::vector<State> finals;

  auto add_pruned = [&params](std::vector<State>& layer, State&& s) {
    for (auto& existing : layer) {
      if (existing.words == s.words) {
        if (better(s, existing)) existing = std::move(s);
        return;
      }
    }
    layer.push_back(std::move(s));
    std::sort(layer.begin(), layer.end(), better);
    if (static_cast<int>(layer.size()) > params.beam_width)
      layer.resize(static_cast<std::size_t>(params.beam_width));
  };

  for (int pos = start; pos <= n; ++pos) {
    auto& layer = layers[static_cast<std::size_t>(pos)];
    if (layer.empty()) continue;
    std::sort(layer.begin(), layer.end(), better);
    if (static_cast<int>(layer.size()) > params.beam_width)
      layer.resize(static_cast<std::size_t>(params.beam_width));

    for (const State& s : layer) {
      if (pos == n) {
        // complete: close the sentence with the </s> term
        State done = s;
        done.lm += lm.log_prob(
            [&] {
              std::vector<std::string> ctx{NGramLM::kBos};
              ctx.insert(ctx.end(), s.words.begin(), s.words.end());
              return ctx;
            }(),
            NGramLM::kEos);
        done.total = done.edit + params.lm_weight * done.lm +
                     params.word_bonus * static_cast<double>(done.words.size());
        finals.push_back(std::move(done));
        continue;
      }
      std::vector<std::string> ctx{NGramLM::kBos};
      ctx.insert(ctx.end(), s.words.begin(), s.words.end());
      for (const auto& word : lex_words) {
        const double word_lp = lm.log_prob(ctx, word);
        for (const std::vector<int>* pron : lexicon.prons(word)) {
          const int max_span = std::min(
              n - pos, static_cast<int>(pron->size()) + params.max_span_slack);
          if (max_span < 1) continue;
          const std::vector<double> pen =
              span_penalties(*pron, phonemes, pos, max_span, params);
          for (int span = 1; span <= max_span; ++span) {
            const double penalty = pen[static_cast<std::size_t>(span)];
            if (penalty <= kForbidden / 2) continue;
            State nxt;
            nxt.words = s.words;
            nxt.words.push_back(word);
            nxt.edit = s.edit + penalty;
            nxt.lm = s.lm + word_lp;
            nxt.total = nxt.edit + params.lm_weight * nxt.lm +
                        params.word_bonus *
                            static_cast<double>(nxt.words.size());
            const int landing = skip_boundaries(phonemes, pos + span);
            add_pruned(layers[static_cast<std::size_t>(landing)],
                       std::move(nxt));
          }
        }
      }
    }
  }

  std::sort(finals.begin(), finals.end(), better);
  std::vector<ReconstructHyp> out;
  for (const State& s : finals) {
    if (static_cast<int>(out.size()) >= params.beam_width) break;
    out.push_back({s.words, s.edit, s.lm, s.total});
  }
  return out;
}

double score_hypothesis(const ReconstructHyp& hyp, const NGramLM& lm,
                        const ReconstructParams& params) {
  const double lm_lp = lm.sentence_log_prob(hyp.words);
  return hyp.edit_penalty + params.lm_weight * lm_lp +
         params.word_bonus * static_cast<double>(hyp.words.size());
}

}  // namespace vsr

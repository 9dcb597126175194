#include "vsr/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vsr/errors.hpp"
#include "vsr/graph.hpp"

namespace vsr {

std::vector<int> augment_phonemes(const std::vector<int>& seq,
                                  double error_rate, std::uint64_t seed) {
  if (!(error_rate >= 0.0 && error_rate <= 0.5))
    throw RateOutOfRange("augment: error rate must lie in [0, 0.5]");
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(seq.size());
  for (int tok : seq) {
    const bool corrupt = rng.uniform() < error_rate;
    if (!corrupt) {
      out.push_back(tok);
      continue;
    }
    const bool special =
        tok == PhonemeVocab::kUnk || tok == PhonemeVocab::kBoundary;
    const int op = static_cast<int>(rng.below(3));  // 0 sub, 1 del, 2 ins
    switch (op) {
      case 0: {  // substitute
        if (special) {
          out.push_back(tok);
          break;
        }
        int pick = 2 + static_cast<int>(rng.below(38));
        if (pick >= tok) ++pick;  // skip the current phoneme
        out.push_back(pick);
        break;
      }
      case 1:  // delete
        break;
      default: {  // insert after
        out.push_back(tok);
        if (!special) out.push_back(2 + static_cast<int>(rng.below(39)));
        break;
      }
    }
  }
  return out;
}

namespace {

struct MouthShape {
  double open, width, round, press;
};

// hand-tuned articulatory poses; {B,P,M} and {T,D} share theirs exactly
const std::vector<std::pair<const char*, MouthShape>>& shape_table() {
  static const std::vector<std::pair<const char*, MouthShape>> table = {
      {"_", {0.06, 1.00, 0.05, 0.30}},  {"AA", {0.95, 1.00, 0.10, 0.00}},
      {"AE", {0.80, 1.15, 0.02, 0.00}}, {"AH", {0.55, 1.00, 0.08, 0.00}},
      {"AO", {0.70, 0.88, 0.55, 0.00}}, {"AW", {0.75, 0.92, 0.40, 0.00}},
      {"AY", {0.85, 1.08, 0.06, 0.00}}, {"B", {0.00, 1.00, 0.00, 1.00}},
      {"CH", {0.25, 0.90, 0.45, 0.05}}, {"D", {0.18, 1.05, 0.02, 0.10}},
      {"DH", {0.22, 1.06, 0.03, 0.05}}, {"EH", {0.60, 1.10, 0.04, 0.00}},
      {"ER", {0.45, 0.95, 0.35, 0.00}}, {"EY", {0.55, 1.18, 0.03, 0.00}},
      {"F", {0.15, 1.04, 0.02, 0.55}},  {"G", {0.30, 1.00, 0.06, 0.00}},
      {"HH", {0.35, 1.02, 0.05, 0.00}}, {"IH", {0.38, 1.12, 0.02, 0.00}},
      {"IY", {0.30, 1.25, 0.00, 0.00}}, {"JH", {0.26, 0.89, 0.47, 0.05}},
      {"K", {0.28, 1.01, 0.05, 0.00}},  {"L", {0.33, 1.03, 0.04, 0.00}},
      {"M", {0.00, 1.00, 0.00, 1.00}},  {"N", {0.20, 1.04, 0.03, 0.12}},
      {"NG", {0.27, 1.00, 0.07, 0.00}}, {"OW", {0.55, 0.80, 0.70, 0.00}},
      {"OY", {0.65, 0.85, 0.60, 0.00}}, {"P", {0.00, 1.00, 0.00, 1.00}},
      {"R", {0.30, 0.92, 0.42, 0.00}},  {"S", {0.15, 1.10, 0.01, 0.08}},
      {"SH", {0.24, 0.88, 0.50, 0.04}}, {"T", {0.18, 1.05, 0.02, 0.10}},
      {"TH", {0.20, 1.07, 0.02, 0.06}}, {"UH", {0.40, 0.85, 0.50, 0.00}},
      {"UW", {0.35, 0.75, 0.80, 0.00}}, {"V", {0.16, 1.03, 0.03, 0.50}},
      {"W", {0.25, 0.78, 0.75, 0.00}},  {"Y", {0.28, 1.15, 0.02, 0.00}},
      {"Z", {0.16, 1.09, 0.01, 0.09}},  {"ZH", {0.25, 0.87, 0.52, 0.04}},
  };
  return table;
}

void scale_ring(Tensor& pts, int begin, int end, double sx, double sy,
                double shift_y) {
  double cx = 0.0, cy = 0.0;
  for (int i = begin; i < end; ++i) {
    cx += pts.at({i, 0});
    cy += pts.at({i, 1});
  }
  cx /= (end - begin);
  cy /= (end - begin);
  for (int i = begin; i < end; ++i) {
    pts.at({i, 0}) = cx + sx * (pts.at({i, 0}) - cx);
    pts.at({i, 1}) = cy + sy * (pts.at({i, 1}) - cy) + shift_y;
  }
}

Tensor pose_config(const Tensor& tmpl, const MouthShape& s) {
  using namespace lip_template;
  Tensor pts = tmpl;
  const double lip_drop = 0.02 * s.open;
  scale_ring(pts, kOuterBegin, kOuterEnd, s.width * (1.0 - 0.35 * s.round),
             (0.55 + 1.1 * s.open) * (1.0 - 0.45 * s.press), lip_drop);
  scale_ring(pts, kInnerBegin, kInnerEnd,
             s.width * (1.0 - 0.40 * s.round) * (1.0 - 0.25 * s.press),
             (0.12 + 2.2 * s.open) * (1.0 - 0.95 * s.press), lip_drop);
  scale_ring(pts, kRing1Begin, kRing1End,
             (1.0 + (s.width - 1.0) * 0.5) * (1.0 - 0.20 * s.round),
             0.75 + 0.55 * s.open, lip_drop * 0.5);
  scale_ring(pts, kRing2Begin, kRing2End,
             (1.0 + (s.width - 1.0) * 0.25) * (1.0 - 0.10 * s.round),
             0.88 + 0.30 * s.open, 0.0);
  // jaw drops with mouth opening; the chin moves the most
  double ymin = 1e9, ymax = -1e9;
  for (int i = kJawBegin; i < kJawEnd; ++i) {
    ymin = std::min(ymin, tmpl.at({i, 1}));
    ymax = std::max(ymax, tmpl.at({i, 1}));
  }
  for (int i = kJawBegin; i < kJawEnd; ++i) {
    const double profile = (tmpl.at({i, 1}) - ymin) / (ymax - ymin);
    pts.at({i, 1}) += 0.10 * s.open * profile;
  }
  for (auto& v : pts.data) v = std::clamp(v, 0.0, 1.0);
  return pts;
}

}  // namespace

void VisemePrototypeTable::validate() const {
  const auto& vocab = phoneme_vocab();
  for (int id = 1; id < vocab.size(); ++id) {
    if (configs.find(id) == configs.end() || dwell.find(id) == dwell.end())
      throw Error("prototype table: missing entry for " + vocab.token(id));
    const Tensor& cfg = configs.at(id);
    if (cfg.ndim() != 2 || cfg.dim(0) != lip_template::kPointCount ||
        cfg.dim(1) != 2)
      throw ShapeMismatch("prototype table: bad config for " + vocab.token(id));
  }
}

VisemePrototypeTable VisemePrototypeTable::standard(
    const Tensor& template_points, int dwell_frames) {
  const auto& vocab = phoneme_vocab();
  VisemePrototypeTable table;
  for (const auto& [name, shape] : shape_table()) {
    const int id = vocab.id(name);
    if (id < 0) throw Error("prototype table: unknown token in shape table");
    table.configs[id] = pose_config(template_points, shape);
    table.dwell[id] = dwell_frames;
  }
  table.validate();
  return table;
}

Utterance synth_utterance(const std::vector<std::string>& words,
                          const Lexicon& lexicon,
                          const VisemePrototypeTable& prototypes,
                          const SynthParams& params, std::uint64_t seed) {
  for (const auto& w : words)
    if (!lexicon.contains(w)) throw OOVWord("synth: word not in lexicon: " + w);
  if (words.empty()) throw EmptyInput("synth: no words given");

  Utterance utt;
  utt.words = words;
  utt.phonemes = g2p(words, lexicon);
  Rng rng(seed);

  // per-utterance speaker distortion of the prototype set
  double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 1.0, bx = 0.0, by = 0.0;
  if (params.speaker_jitter > 0.0) {
    a00 += params.speaker_jitter * rng.gauss();
    a01 += params.speaker_jitter * rng.gauss();
    a10 += params.speaker_jitter * rng.gauss();
    a11 += params.speaker_jitter * rng.gauss();
    bx = 0.1 * params.speaker_jitter * rng.gauss();
    by = 0.1 * params.speaker_jitter * rng.gauss();
  }
  auto distort = [&](double x, double y) {
    const double dx = x - 0.5, dy = y - 0.5;
    return std::pair<double, double>{0.5 + a00 * dx + a01 * dy + bx,
                                     0.5 + a10 * dx + a11 * dy + by};
  };

  // segment centers per token
  const int m = static_cast<int>(utt.phonemes.size());
  std::vector<double> centers(static_cast<std::size_t>(m));
  std::vector<const Tensor*> cfgs(static_cast<std::size_t>(m));
  int total = 0;
  for (int i = 0; i < m; ++i) {
    const int id = utt.phonemes[static_cast<std::size_t>(i)];
    const auto cit = prototypes.configs.find(id);
    const auto dit = prototypes.dwell.find(id);
    if (cit == prototypes.configs.end() || dit == prototypes.dwell.end())
      throw Error("synth: prototype table missing token " +
                  phoneme_vocab().token(id));
    cfgs[static_cast<std::size_t>(i)] = &cit->second;
    centers[static_cast<std::size_t>(i)] = total + (dit->second - 1) / 2.0;
    total += dit->second;
  }

  const int n = lip_template::kPointCount;
  utt.landmarks.frames = Tensor({total, n, 2});
  utt.landmarks.valid.assign(static_cast<std::size_t>(total), true);
  for (int f = 0; f < total; ++f) {
    // piecewise-linear between neighboring segment centers
    int seg = 0;
    while (seg + 1 < m && centers[static_cast<std::size_t>(seg + 1)] < f) ++seg;
    double w = 0.0;
    int lo = seg, hi = seg;
    if (f <= centers[0]) {
      lo = hi = 0;
    } else if (f >= centers[static_cast<std::size_t>(m - 1)]) {
      lo = hi = m - 1;
    } else {
      lo = seg;
      hi = seg + 1;
      w = (f - centers[static_cast<std::size_t>(lo)]) /
          (centers[static_cast<std::size_t>(hi)] -
           centers[static_cast<std::size_t>(lo)]);
    }
    const Tensor& ca = *cfgs[static_cast<std::size_t>(lo)];
    const Tensor& cb = *cfgs[static_cast<std::size_t>(hi)];
    for (int p = 0; p < n; ++p) {
      double x = (1.0 - w) * ca.at({p, 0}) + w * cb.at({p, 0});
      double y = (1.0 - w) * ca.at({p, 1}) + w * cb.at({p, 1});
      auto [dx, dy] = distort(x, y);
      if (params.noise_sigma > 0.0) {
        dx += rng.gauss(0.0, params.noise_sigma);
        dy += rng.gauss(0.0, params.noise_sigma);
      }
      utt.landmarks.frames.at({f, p, 0}) = std::clamp(dx, 0.0, 1.0);
      utt.landmarks.frames.at({f, p, 1}) = std::clamp(dy, 0.0, 1.0);
    }
  }

  // render each frame from its landmarks
  const int h = params.render_h, wpx = params.render_w;
  utt.frames = Tensor({total, h, wpx});
  for (int f = 0; f < total; ++f) {
    Tensor pts({n, 2});
    for (int p = 0; p < n; ++p) {
      pts.at({p, 0}) = utt.landmarks.frames.at({f, p, 0});
      pts.at({p, 1}) = utt.landmarks.frames.at({f, p, 1});
    }
    const Tensor img = render_landmark_frame(pts, h, wpx, params.blob_sigma_px);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < wpx; ++xx)
        utt.frames.at({f, yy, xx}) = img.at({yy, xx});
  }
  return utt;
}

Tensor render_landmark_frame(const Tensor& points, int h, int w,
                             double sigma) {
  check_shape(points.ndim() == 2 && points.dim(1) == 2,
              "render: points must be [N,2]");
  Tensor img({h, w});
  const int win = static_cast<int>(std::ceil(3.0 * sigma));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (int p = 0; p < points.dim(0); ++p) {
    const double px = points.at({p, 0}) * w - 0.5;
    const double py = points.at({p, 1}) * h - 0.5;
    const int x0 = std::max(0, static_cast<int>(std::floor(px)) - win);
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(px)) + win);
    const int y0 = std::max(0, static_cast<int>(std::floor(py)) - win);
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(py)) + win);
    for (int yy = y0; yy <= y1; ++yy)
      for (int xx = x0; xx <= x1; ++xx) {
        const double dx = xx - px, dy = yy - py;
        img.at({yy, xx}) += std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
  }
  return img;
}

std::vector<Utterance> synth_corpus(int count, int min_words, int max_words,
                                    const Lexicon& lexicon,
                                    const VisemePrototypeTable& prototypes,
                                    const SynthParams& params,
                                    std::uint64_t seed) {
  if (count < 1 || min_words < 1 || max_words < min_words)
    throw Error("synth_corpus: bad count or word range");
  const auto words = lexicon.words();
  if (words.empty()) throw EmptyLexicon("synth_corpus: empty lexicon");
  Rng rng(seed);
  std::vector<Utterance> corpus;
  corpus.reserve(static_cast<std::size_t>(count));
  char idbuf[32];
  for (int i = 0; i < count; ++i) {
    const int len =
        min_words + static_cast<int>(rng.below(
                        static_cast<std::uint64_t>(max_words - min_words + 1)));
    std::vector<std::string> sentence;
    for (int j = 0; j < len; ++j)
      sentence.push_back(words[rng.below(words.size())]);
    Utterance utt = synth_utterance(sentence, lexicon, prototypes, params,
                                    seed + 1000003ULL * (i + 1));
    std::snprintf(idbuf, sizeof idbuf, "synth-%06d", i);
    utt.id = idbuf;
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace vsr

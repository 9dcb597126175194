#ifndef VSR_SYNTH_HPP
#define VSR_SYNTH_HPP

#include <map>
#include <string>
#include <vector>

#include "vsr/clips.hpp"
#include "vsr/text.hpp"

namespace vsr {

// Per-token corruption: with probability error_rate a token draws one of
// {substitute, delete, insert-after} uniformly. Substitutions resample
// uniformly over the other 38 phonemes; insertions add a uniform phoneme.
// "_" and <unk> are eligible for deletion only (the other ops leave them
// unchanged). Deterministic for a given seed.
std::vector<int> augment_phonemes(const std::vector<int>& seq,
                                  double error_rate, std::uint64_t seed);

// Target lip configuration and dwell frames per phoneme. Viseme collapse is
// expressed by giving several phonemes the same configuration ({B,P,M} and
// {T,D} in the standard table).
struct VisemePrototypeTable {
  std::map<int, Tensor> configs;  // phoneme id -> [117,2]
  std::map<int, int> dwell;       // phoneme id -> frames

  // every phoneme and "_" must be covered
  void validate() const;

  // procedural table derived from the landmark template
  static VisemePrototypeTable standard(const Tensor& template_points,
                                       int dwell_frames = 3);
};

struct SynthParams {
  double noise_sigma = 0.01;    // landmark jitter, unit-square units
  int render_h = 16;
  int render_w = 16;
  double blob_sigma_px = 1.0;   // Gaussian splat radius, pixels
  double speaker_jitter = 0.0;  // per-utterance affine distortion; 0 = off
};

struct Utterance {
  std::string id;
  std::vector<std::string> words;
  std::vector<int> phonemes;  // g2p output, with "_" boundaries
  LandmarkClip landmarks;
  Tensor frames;  // [T,H,W] raw render intensities (normalized at training)
};

// splats each point as an isotropic Gaussian blob onto an h x w grid;
// points are unit-square coordinates, sigma is in pixels
Tensor render_landmark_frame(const Tensor& points, int h, int w, double sigma);

// Landmark trajectory through the phoneme prototypes (piecewise linear
// between segment centers, dwell frames per token) plus Gaussian jitter,
// rendered to frames by splatting each landmark as an isotropic Gaussian
// blob. Deterministic per seed. Throws OOVWord for words missing from the
// lexicon.
Utterance synth_utterance(const std::vector<std::string>& words,
                          const Lexicon& lexicon,
                          const VisemePrototypeTable& prototypes,
                          const SynthParams& params, std::uint64_t seed);

// random sentences of [min_words, max_words] words drawn uniformly from the
// lexicon; one call per corpus keeps utterance seeds disjoint
std::vector<Utterance> synth_corpus(int count, int min_words, int max_words,
                                    const Lexicon& lexicon,
                                    const VisemePrototypeTable& prototypes,
                                    const SynthParams& params,
                                    std::uint64_t seed);

}  // namespace vsr

#endif  // VSR_SYNTH_HPP

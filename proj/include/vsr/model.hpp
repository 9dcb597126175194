#ifndef VSR_MODEL_HPP
#define VSR_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "vsr/clips.hpp"
#include "vsr/layers.hpp"
#include "vsr/stgcn.hpp"
#include "vsr/vocab.hpp"

namespace vsr {

struct Stage1Config {
  int d_enc = 64;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 4;

  // visual front-end
  int conv_kt = 5, conv_kh = 7, conv_kw = 7;
  int conv_st = 1, conv_sh = 2, conv_sw = 2;
  int front_channels = 8;
  int residual_blocks = 2;
  int crop = 96;  // expected H == W

  // landmark stream
  int stgcn_channels = 64;
  int stgcn_blocks = 6;
  int stgcn_temporal_kernel = 5;
  int graph_knn = 4;
  bool use_landmarks = true;  // false = visual-only ablation

  int fusion_hidden = 128;
  int ffn_hidden = 128;
  bool encoder_conv_block = true;

  int vocab_size = PhonemeVocab::kSize;  // fixed inventory
  std::uint64_t seed = 1;

  void validate() const;
};

// Visual-stream encoder: spatiotemporal conv front-end, lite residual 2-D
// blocks applied per frame, spatial pooling, then temporal encoder blocks.
class VasrEncoder {
 public:
  VasrEncoder(const Stage1Config& cfg, Rng& rng);
  Var encode(Tape& t, const FrameClip& clip) const;  // [T,d_enc]
  void register_params(ParamRegistry& reg, const std::string& prefix);

 private:
  struct ResBlock {
    Tensor k1, b1, k2, b2;  // conv3d taps with kt=1
  };
  Stage1Config cfg_;
  Tensor conv_kernel_;  // [kt,kh,kw,1,C]
  Tensor conv_bias_;    // [C]
  std::vector<ResBlock> res_;
  Linear proj_;
  std::vector<EncoderBlock> encoder_;
};

// Two-layer MLP fusing the visual and landmark streams; the landmark stream
// is linearly resampled along time when the lengths differ.
struct FusionMlp {
  Linear l1, l2;
  void init(int d_enc, int hidden, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  Var apply(Tape& t, Var visual, Var landmark) const;
};

// Autoregressive phoneme decoder over the combined symbol table.
class PhonemeDecoder {
 public:
  PhonemeDecoder() = default;
  void init(const Stage1Config& cfg, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  // prefix: symbol ids starting with BOS; returns [len(prefix), 44] logits
  Var logits(Tape& t, Var memory, const std::vector<int>& prefix) const;

 private:
  int d_enc_ = 0;
  Tensor embed_;  // [44,d_enc]
  std::vector<DecoderBlock> blocks_;
  LayerNorm ln_out_;
  Linear out_;
};

class Stage1Model {
 public:
  Stage1Model(const Stage1Config& cfg, const Tensor& template_positions);

  Var vasr_encode(Tape& t, const FrameClip& clip) const;
  Var pasr_encode(Tape& t, const LandmarkClip& clip) const;
  Var fuse(Tape& t, Var visual, Var landmark) const;
  // encodes both streams and fuses; landmark stream replaced by zeros when
  // the config disables it
  Var encode(Tape& t, const FrameClip& frames, const LandmarkClip& landmarks) const;
  Var ctc_project(Tape& t, Var fused) const;  // [T,42] log-probabilities
  Var decode_head(Tape& t, Var fused, const std::vector<int>& prefix) const;

  struct ForwardOut {
    Var ctc_logprobs;  // [T,42]
    Var ce_logits;     // [L+1,44]
    Var fused;         // [T,d_enc]
  };
  // target: vocab ids (0..40); the decoder sees BOS + target and is scored
  // against target + EOS
  ForwardOut forward(Tape& t, const FrameClip& frames,
                     const LandmarkClip& landmarks,
                     const std::vector<int>& target) const;

  static std::vector<int> decoder_prefix(const std::vector<int>& target);
  static std::vector<int> decoder_targets(const std::vector<int>& target);

  // autoregressive greedy decode against an encoded memory; returns vocab
  // ids, stopping at EOS or max_len tokens
  std::vector<int> attention_greedy(Tape& t, Var memory, int max_len) const;

  const Stage1Config& config() const { return cfg_; }
  ParamRegistry& params() { return reg_; }
  const ParamRegistry& params() const { return reg_; }

 private:
  Stage1Config cfg_;
  std::unique_ptr<VasrEncoder> vasr_;
  std::unique_ptr<PasrEncoder> pasr_;
  FusionMlp fusion_;
  Linear ctc_proj_;
  PhonemeDecoder decoder_;
  ParamRegistry reg_;
};

}  // namespace vsr

#endif  // VSR_MODEL_HPP

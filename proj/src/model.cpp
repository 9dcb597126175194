#include "vsr/model.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

void Stage1Config::validate() const {
  if (vocab_size != PhonemeVocab::kSize)
    throw Error("config: vocab_size is fixed at 41 by the phoneme inventory");
  if (d_enc % heads != 0) throw Error("config: d_enc must be divisible by heads");
  if (d_enc < 1 || encoder_layers < 1 || decoder_layers < 1)
    throw Error("config: layer counts and d_enc must be positive");
  if (conv_st < 1 || conv_sh < 1 || conv_sw < 1)
    throw InvalidStride("config: conv3d stride components must be >= 1");
  if (stgcn_blocks < 1 || stgcn_channels < 1)
    throw Error("config: stgcn stack must be non-empty");
  if (stgcn_temporal_kernel % 2 != 1)
    throw Error("config: stgcn temporal kernel must be odd");
}

// ---- VasrEncoder ---------------------------------------------------------------

VasrEncoder::VasrEncoder(const Stage1Config& cfg, Rng& rng) : cfg_(cfg) {
  const int c = cfg.front_channels;
  conv_kernel_ = Tensor({cfg.conv_kt, cfg.conv_kh, cfg.conv_kw, 1, c});
  const int fan = cfg.conv_kt * cfg.conv_kh * cfg.conv_kw;
  fill_gaussian(conv_kernel_, rng, std::sqrt(2.0 / (fan + fan * c)));
  conv_bias_ = Tensor({c});
  res_.resize(static_cast<std::size_t>(cfg.residual_blocks));
  for (auto& blk : res_) {
    blk.k1 = Tensor({1, 3, 3, c, c});
    fill_gaussian(blk.k1, rng, std::sqrt(2.0 / (9 * c + 9 * c)));
    blk.b1 = Tensor({c});
    blk.k2 = Tensor({1, 3, 3, c, c});
    fill_gaussian(blk.k2, rng, std::sqrt(2.0 / (9 * c + 9 * c)));
    blk.b2 = Tensor({c});
  }
  proj_.init(c, cfg.d_enc, rng);
  encoder_.resize(static_cast<std::size_t>(cfg.encoder_layers));
  for (auto& blk : encoder_)
    blk.init(cfg.d_enc, cfg.heads, cfg.ffn_hidden, 5, cfg.encoder_conv_block,
             rng);
}

void VasrEncoder::register_params(ParamRegistry& reg,
                                  const std::string& prefix) {
  reg.add(prefix + ".conv_kernel", &conv_kernel_);
  reg.add(prefix + ".conv_bias", &conv_bias_);
  for (std::size_t i = 0; i < res_.size(); ++i) {
    const std::string p = prefix + ".res" + std::to_string(i);
    reg.add(p + ".k1", &res_[i].k1);
    reg.add(p + ".b1", &res_[i].b1);
    reg.add(p + ".k2", &res_[i].k2);
    reg.add(p + ".b2", &res_[i].b2);
  }
  proj_.register_params(reg, prefix + ".proj");
  for (std::size_t i = 0; i < encoder_.size(); ++i)
    encoder_[i].register_params(reg, prefix + ".enc" + std::to_string(i));
}

Var VasrEncoder::encode(Tape& t, const FrameClip& clip) const {
  const Tensor& f = clip.frames;
  check_shape(f.ndim() == 3, "vasr: frames must be [T,H,W]");
  check_shape(f.dim(1) == f.dim(2), "vasr: frames must be square crops");
  const int frames = f.dim(0);
  const int c = cfg_.front_channels;

  Var x = t.reshape(t.constant(f), {frames, f.dim(1), f.dim(2), 1});
  x = t.conv3d(x, t.leaf(const_cast<Tensor*>(&conv_kernel_)),
               {cfg_.conv_st, cfg_.conv_sh, cfg_.conv_sw},
               Conv3dPad::kSameTemporal);
  const Tensor& shape_probe = t.val(x);
  const int ho = shape_probe.dim(1), wo = shape_probe.dim(2);
  const int to = shape_probe.dim(0);
  x = t.reshape(x, {to * ho * wo, c});
  x = t.add_rowvec(x, t.leaf(const_cast<Tensor*>(&conv_bias_)));
  x = t.mish(t.reshape(x, {to, ho, wo, c}));

  for (const auto& blk : res_) {
    Var h = t.conv3d(x, t.leaf(const_cast<Tensor*>(&blk.k1)), {1, 1, 1},
                     Conv3dPad::kSame);
    h = t.reshape(h, {to * ho * wo, c});
    h = t.mish(t.add_rowvec(h, t.leaf(const_cast<Tensor*>(&blk.b1))));
    h = t.conv3d(t.reshape(h, {to, ho, wo, c}),
                 t.leaf(const_cast<Tensor*>(&blk.k2)), {1, 1, 1},
                 Conv3dPad::kSame);
    h = t.reshape(h, {to * ho * wo, c});
    h = t.add_rowvec(h, t.leaf(const_cast<Tensor*>(&blk.b2)));
    x = t.mish(t.add(x, t.reshape(h, {to, ho, wo, c})));
  }

  Var pooled = t.mean_hw(x);  // [T,C]
  Var h = t.mish(proj_.apply(t, pooled));
  h = t.add_const(h, sinusoidal_pe(to, cfg_.d_enc));
  for (const auto& blk : encoder_) h = blk.apply(t, h);
  return h;
}

// ---- FusionMlp -------------------------------------------------------------------

void FusionMlp::init(int d_enc, int hidden, Rng& rng) {
  l1.init(2 * d_enc, hidden, rng);
  l2.init(hidden, d_enc, rng);
}

void FusionMlp::register_params(ParamRegistry& reg, const std::string& prefix) {
  l1.register_params(reg, prefix + ".l1");
  l2.register_params(reg, prefix + ".l2");
}

Var FusionMlp::apply(Tape& t, Var visual, Var landmark) const {
  const Tensor& vv = t.val(visual);
  const Tensor& lv = t.val(landmark);
  check_shape(vv.ndim() == 2 && lv.ndim() == 2, "fuse: expects [T,d] streams");
  check_shape(vv.dim(1) == lv.dim(1), "fuse: stream widths differ");
  if (vv.dim(0) < 1 || lv.dim(0) < 1) throw EmptyInput("fuse: empty stream");
  Var lm = landmark;
  if (lv.dim(0) != vv.dim(0)) lm = t.time_interp(landmark, vv.dim(0));
  Var cat = t.concat_cols({visual, lm});
  return l2.apply(t, t.mish(l1.apply(t, cat)));
}

// ---- PhonemeDecoder -----------------------------------------------------------------

void PhonemeDecoder::init(const Stage1Config& cfg, Rng& rng) {
  d_enc_ = cfg.d_enc;
  embed_ = Tensor({symbols::kDecoderTable, cfg.d_enc});
  fill_gaussian(embed_, rng, 0.05);
  blocks_.resize(static_cast<std::size_t>(cfg.decoder_layers));
  for (auto& blk : blocks_) blk.init(cfg.d_enc, cfg.heads, cfg.ffn_hidden, rng);
  ln_out_.init(cfg.d_enc);
  out_.init(cfg.d_enc, symbols::kDecoderTable, rng);
}

void PhonemeDecoder::register_params(ParamRegistry& reg,
                                     const std::string& prefix) {
  reg.add(prefix + ".embed", &embed_);
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].register_params(reg, prefix + ".blk" + std::to_string(i));
  ln_out_.register_params(reg, prefix + ".ln_out");
  out_.register_params(reg, prefix + ".out");
}

Var PhonemeDecoder::logits(Tape& t, Var memory,
                           const std::vector<int>& prefix) const {
  if (prefix.empty()) throw EmptyPrefix("decoder prefix must start with BOS");
  if (prefix.front() != symbols::kBos)
    throw Error("decoder prefix must start with the BOS sentinel");
  Var x = t.embedding(t.leaf(const_cast<Tensor*>(&embed_)), prefix);
  x = t.add_const(x, sinusoidal_pe(static_cast<int>(prefix.size()), d_enc_));
  for (const auto& blk : blocks_) x = blk.apply(t, x, memory);
  x = ln_out_.apply(t, x);
  return out_.apply(t, x);
}

// ---- Stage1Model -----------------------------------------------------------------

Stage1Model::Stage1Model(const Stage1Config& cfg,
                         const Tensor& template_positions)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg.seed);
  vasr_ = std::make_unique<VasrEncoder>(cfg_, rng);
  PasrConfig pc;
  pc.channels = cfg.stgcn_channels;
  pc.blocks = cfg.stgcn_blocks;
  pc.temporal_kernel = cfg.stgcn_temporal_kernel;
  pc.d_enc = cfg.d_enc;
  pc.encoder_layers = cfg.encoder_layers;
  pc.heads = cfg.heads;
  pc.ffn_hidden = cfg.ffn_hidden;
  pc.encoder_conv_block = cfg.encoder_conv_block;
  pc.knn = cfg.graph_knn;
  pasr_ = std::make_unique<PasrEncoder>(pc, template_positions, rng);
  fusion_.init(cfg.d_enc, cfg.fusion_hidden, rng);
  ctc_proj_.init(cfg.d_enc, symbols::kCtcWidth, rng);
  decoder_.init(cfg_, rng);

  vasr_->register_params(reg_, "vasr");
  if (cfg_.use_landmarks) pasr_->register_params(reg_, "pasr");
  fusion_.register_params(reg_, "fusion");
  ctc_proj_.register_params(reg_, "ctc_proj");
  decoder_.register_params(reg_, "decoder");
}

Var Stage1Model::vasr_encode(Tape& t, const FrameClip& clip) const {
  return vasr_->encode(t, clip);
}

Var Stage1Model::pasr_encode(Tape& t, const LandmarkClip& clip) const {
  return pasr_->encode(t, clip);
}

Var Stage1Model::fuse(Tape& t, Var visual, Var landmark) const {
  return fusion_.apply(t, visual, landmark);
}

Var Stage1Model::encode(Tape& t, const FrameClip& frames,
                        const LandmarkClip& landmarks) const {
  Var vis = vasr_->encode(t, frames);
  Var lm;
  if (cfg_.use_landmarks) {
    lm = pasr_->encode(t, landmarks);
  } else {
    lm = t.constant(Tensor({t.val(vis).dim(0), cfg_.d_enc}));
  }
  return fusion_.apply(t, vis, lm);
}

Var Stage1Model::ctc_project(Tape& t, Var fused) const {
  return t.log_softmax_rows(ctc_proj_.apply(t, fused));
}

Var Stage1Model::decode_head(Tape& t, Var fused,
                             const std::vector<int>& prefix) const {
  return decoder_.logits(t, fused, prefix);
}

std::vector<int> Stage1Model::decoder_prefix(const std::vector<int>& target) {
  std::vector<int> prefix{symbols::kBos};
  for (int v : target) prefix.push_back(symbols::from_vocab(v));
  return prefix;
}

std::vector<int> Stage1Model::decoder_targets(const std::vector<int>& target) {
  std::vector<int> out;
  for (int v : target) out.push_back(symbols::from_vocab(v));
  out.push_back(symbols::kEos);
  return out;
}

std::vector<int> Stage1Model::attention_greedy(Tape& t, Var memory,
                                               int max_len) const {
  std::vector<int> prefix{symbols::kBos};
  std::vector<int> out;
  for (int step = 0; step < max_len; ++step) {
    Var logits = decoder_.logits(t, memory, prefix);
    const Tensor& lv = t.val(logits);
    const int last = lv.dim(0) - 1;
    int best = -1;
    for (int j = 0; j < lv.dim(1); ++j) {
      if (j == symbols::kCtcBlank || j == symbols::kBos) continue;
      if (best < 0 || lv.at({last, j}) > lv.at({last, best})) best = j;
    }
    if (best == symbols::kEos) break;
    prefix.push_back(best);
    out.push_back(symbols::to_vocab(best));
  }
  return out;
}

Stage1Model::ForwardOut Stage1Model::forward(
    Tape& t, const FrameClip& frames, const LandmarkClip& landmarks,
    const std::vector<int>& target) const {
  ForwardOut out;
  out.fused = encode(t, frames, landmarks);
  out.ctc_logprobs = ctc_project(t, out.fused);
  out.ce_logits = decode_head(t, out.fused, decoder_prefix(target));
  return out;
}

}  // namespace vsr

#include "vsr/stgcn.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

void StgcnBlock::init(int cin, int cout, int kt, Rng& rng) {
  if (kt % 2 != 1) throw ShapeMismatch("stgcn: temporal kernel must be odd");
  residual = (cin == cout);
  w = Tensor({cin, cout});
  fill_gaussian(w, rng, std::sqrt(2.0 / (cin + cout)));
  b = Tensor({cout});
  tkernel = Tensor({kt, cout, cout});
  fill_gaussian(tkernel, rng, std::sqrt(2.0 / (kt * cout + cout)));
  // bias the center tap toward identity so the stack starts near-linear
  for (int c = 0; c < cout; ++c) tkernel.at({kt / 2, c, c}) += 1.0;
  tbias = Tensor({cout});
}

void StgcnBlock::register_params(ParamRegistry& reg,
                                 const std::string& prefix) {
  reg.add(prefix + ".w", &w);
  reg.add(prefix + ".b", &b);
  reg.add(prefix + ".tkernel", &tkernel);
  reg.add(prefix + ".tbias", &tbias);
}

Var StgcnBlock::apply(Tape& t, Var x, const kernels::SparseMatrix& adj) const {
  const Tensor& xv = t.val(x);
  check_shape(xv.ndim() == 3, "stgcn: input must be [T,N,C]");
  check_shape(xv.dim(2) == w.dim(0), "stgcn: channel mismatch");
  const int frames = xv.dim(0), nodes = xv.dim(1);
  const int cout = w.dim(1);

  Var y = t.graph_conv(x, adj);
  y = t.reshape(y, {frames * nodes, w.dim(0)});
  y = t.add_rowvec(t.matmul(y, t.leaf(const_cast<Tensor*>(&w))),
                   t.leaf(const_cast<Tensor*>(&b)));
  y = t.reshape(y, {frames, nodes, cout});
  y = t.conv1d_nodes(y, t.leaf(const_cast<Tensor*>(&tkernel)));
  y = t.reshape(y, {frames * nodes, cout});
  y = t.add_rowvec(y, t.leaf(const_cast<Tensor*>(&tbias)));
  y = t.reshape(y, {frames, nodes, cout});
  y = t.mish(y);
  if (residual) y = t.add(y, x);
  return y;
}

PasrEncoder::PasrEncoder(const PasrConfig& cfg,
                         const Tensor& template_positions, Rng& rng)
    : cfg_(cfg) {
  graph_ = build_lip_adjacency(template_positions, cfg.knn);
  adj_ = to_sparse(graph_.adjacency);
  blocks_.resize(static_cast<std::size_t>(cfg.blocks));
  for (int i = 0; i < cfg.blocks; ++i)
    blocks_[static_cast<std::size_t>(i)].init(i == 0 ? 2 : cfg.channels,
                                              cfg.channels,
                                              cfg.temporal_kernel, rng);
  proj_.init(cfg.channels, cfg.d_enc, rng);
  encoder_.resize(static_cast<std::size_t>(cfg.encoder_layers));
  for (auto& blk : encoder_)
    blk.init(cfg.d_enc, cfg.heads, cfg.ffn_hidden, 5, cfg.encoder_conv_block,
             rng);
}

void PasrEncoder::register_params(ParamRegistry& reg,
                                  const std::string& prefix) {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].register_params(reg, prefix + ".block" + std::to_string(i));
  proj_.register_params(reg, prefix + ".proj");
  for (std::size_t i = 0; i < encoder_.size(); ++i)
    encoder_[i].register_params(reg, prefix + ".enc" + std::to_string(i));
}

Var PasrEncoder::encode(Tape& t, const LandmarkClip& clip) const {
  if (clip.length() < 1) throw EmptyClip("landmark clip has no frames");
  clip.validate();
  Var x = t.constant(clip.frames);
  for (const auto& blk : blocks_) x = blk.apply(t, x, adj_);
  Var pooled = t.mean_nodes(x);  // [T,C]
  Var h = t.mish(proj_.apply(t, pooled));
  h = t.add_const(h, sinusoidal_pe(clip.length(), cfg_.d_enc));
  for (const auto& blk : encoder_) h = blk.apply(t, h);
  return h;
}

}  // namespace vsr

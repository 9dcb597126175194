#include "vsr/layers.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

void xavier(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double sigma = std::sqrt(2.0 / (fan_in + fan_out));
  fill_gaussian(t, rng, sigma);
}

}  // namespace

void Linear::init(int in, int out, Rng& rng) {
  w = Tensor({in, out});
  b = Tensor({out});
  xavier(w, in, out, rng);
}

void Linear::register_params(ParamRegistry& reg, const std::string& prefix) {
  reg.add(prefix + ".w", &w);
  reg.add(prefix + ".b", &b);
}

Var Linear::apply(Tape& t, Var x) const {
  const Tensor& xv = t.val(x);
  const int in = w.dim(0);
  check_shape(xv.shape.back() == in, "linear: input width mismatch");
  Var x2 = x;
  if (xv.ndim() != 2) x2 = t.reshape(x, {xv.size() / in, in});
  Var y = t.add_rowvec(t.matmul(x2, t.leaf(const_cast<Tensor*>(&w))),
                       t.leaf(const_cast<Tensor*>(&b)));
  if (xv.ndim() != 2) {
    std::vector<int> shape = xv.shape;
    shape.back() = w.dim(1);
    y = t.reshape(y, shape);
  }
  return y;
}

void LayerNorm::init(int dim) {
  gamma = Tensor::full({dim}, 1.0);
  beta = Tensor({dim});
}

void LayerNorm::register_params(ParamRegistry& reg, const std::string& prefix) {
  reg.add(prefix + ".gamma", &gamma);
  reg.add(prefix + ".beta", &beta);
}

Var LayerNorm::apply(Tape& t, Var x) const {
  return t.layer_norm(x, t.leaf(const_cast<Tensor*>(&gamma)),
                      t.leaf(const_cast<Tensor*>(&beta)));
}

void MhaParams::init(int dim, int heads_, Rng& rng) {
  if (dim % heads_ != 0)
    throw ShapeMismatch("attention: dim must be divisible by heads");
  heads = heads_;
  wq.init(dim, dim, rng);
  wk.init(dim, dim, rng);
  wv.init(dim, dim, rng);
  wo.init(dim, dim, rng);
}

void MhaParams::register_params(ParamRegistry& reg, const std::string& prefix) {
  wq.register_params(reg, prefix + ".wq");
  wk.register_params(reg, prefix + ".wk");
  wv.register_params(reg, prefix + ".wv");
  wo.register_params(reg, prefix + ".wo");
}

Var multi_head_attention(Tape& t, Var q, Var k, Var v, const MhaParams& p,
                         bool causal) {
  const Tensor& qv = t.val(q);
  const Tensor& kv = t.val(k);
  check_shape(qv.ndim() == 2 && kv.ndim() == 2, "attention: expects [T,d]");
  check_shape(qv.dim(1) == p.wq.w.dim(0), "attention: feature width mismatch");
  check_shape(kv.dim(1) == qv.dim(1), "attention: q/k width mismatch");
  check_shape(t.val(v).shape == kv.shape, "attention: k/v shape mismatch");
  const int tq = qv.dim(0);
  const int tk = kv.dim(0);
  const int d = qv.dim(1);
  const int dh = d / p.heads;

  Var q2 = p.wq.apply(t, q);
  Var k2 = p.wk.apply(t, k);
  Var v2 = p.wv.apply(t, v);

  Tensor mask({tq, tk});
  if (causal) {
    check_shape(tq == tk, "attention: causal mask needs square scores");
    for (int i = 0; i < tq; ++i)
      for (int j = i + 1; j < tk; ++j) mask.at({i, j}) = kNegHuge;
  }

  std::vector<Var> heads_out;
  heads_out.reserve(static_cast<std::size_t>(p.heads));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < p.heads; ++h) {
    Var qh = t.slice_cols(q2, h * dh, (h + 1) * dh);
    Var kh = t.slice_cols(k2, h * dh, (h + 1) * dh);
    Var vh = t.slice_cols(v2, h * dh, (h + 1) * dh);
    Var scores = t.scale(t.matmul(qh, kh, false, true), inv_sqrt);
    if (causal) scores = t.add_const(scores, mask);
    Var att = t.softmax_rows(scores);
    heads_out.push_back(t.matmul(att, vh));
  }
  Var cat = t.concat_cols(heads_out);
  return p.wo.apply(t, cat);
}

void EncoderBlock::init(int dim, int heads, int ffn_hidden, int conv_kt,
                        bool use_conv_, Rng& rng) {
  use_conv = use_conv_;
  ln_att.init(dim);
  att.init(dim, heads, rng);
  if (use_conv) {
    ln_conv.init(dim);
    conv_kernel = Tensor({conv_kt, dim});
    // impulse-biased init keeps early training close to identity
    fill_gaussian(conv_kernel, rng, 0.1);
    for (int c = 0; c < dim; ++c) conv_kernel.at({conv_kt / 2, c}) += 1.0;
  }
  ln_ffn.init(dim);
  ffn1.init(dim, ffn_hidden, rng);
  ffn2.init(ffn_hidden, dim, rng);
}

void EncoderBlock::register_params(ParamRegistry& reg,
                                   const std::string& prefix) {
  ln_att.register_params(reg, prefix + ".ln_att");
  att.register_params(reg, prefix + ".att");
  if (use_conv) {
    ln_conv.register_params(reg, prefix + ".ln_conv");
    reg.add(prefix + ".conv_kernel", &conv_kernel);
  }
  ln_ffn.register_params(reg, prefix + ".ln_ffn");
  ffn1.register_params(reg, prefix + ".ffn1");
  ffn2.register_params(reg, prefix + ".ffn2");
}

Var EncoderBlock::apply(Tape& t, Var x) const {
  Var h = ln_att.apply(t, x);
  x = t.add(x, multi_head_attention(t, h, h, h, att, false));
  if (use_conv) {
    Var c = ln_conv.apply(t, x);
    c = t.dwconv1d(c, t.leaf(const_cast<Tensor*>(&conv_kernel)));
    x = t.add(x, c);
  }
  Var f = ln_ffn.apply(t, x);
  f = ffn2.apply(t, t.mish(ffn1.apply(t, f)));
  return t.add(x, f);
}

Tensor sinusoidal_pe(int t, int d) {
  Tensor pe({t, d});
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < d; ++j) {
      const double rate = std::pow(10000.0, -2.0 * (j / 2) / d);
      pe.at({i, j}) = (j % 2 == 0) ? std::sin(i * rate) : std::cos(i * rate);
    }
  return pe;
}

void DecoderBlock::init(int dim, int heads, int ffn_hidden, Rng& rng) {
  ln_self.init(dim);
  self_att.init(dim, heads, rng);
  ln_cross.init(dim);
  cross_att.init(dim, heads, rng);
  ln_ffn.init(dim);
  ffn1.init(dim, ffn_hidden, rng);
  ffn2.init(ffn_hidden, dim, rng);
}

void DecoderBlock::register_params(ParamRegistry& reg,
                                   const std::string& prefix) {
  ln_self.register_params(reg, prefix + ".ln_self");
  self_att.register_params(reg, prefix + ".self_att");
  ln_cross.register_params(reg, prefix + ".ln_cross");
  cross_att.register_params(reg, prefix + ".cross_att");
  ln_ffn.register_params(reg, prefix + ".ln_ffn");
  ffn1.register_params(reg, prefix + ".ffn1");
  ffn2.register_params(reg, prefix + ".ffn2");
}

Var DecoderBlock::apply(Tape& t, Var x, Var memory) const {
  Var h = ln_self.apply(t, x);
  x = t.add(x, multi_head_attention(t, h, h, h, self_att, true));
  Var c = ln_cross.apply(t, x);
  x = t.add(x, multi_head_attention(t, c, memory, memory, cross_att, false));
  Var f = ln_ffn.apply(t, x);
  f = ffn2.apply(t, t.mish(ffn1.apply(t, f)));
  return t.add(x, f);
}

}  // namespace vsr

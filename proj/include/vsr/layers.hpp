#ifndef VSR_LAYERS_HPP
#define VSR_LAYERS_HPP

#include <string>
#include <vector>

#include "vsr/params.hpp"
#include "vsr/tape.hpp"

namespace vsr {

struct Linear {
  Tensor w;  // [in,out]
  Tensor b;  // [out]

  void init(int in, int out, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  Var apply(Tape& t, Var x) const;  // x:[*,in] flattened to rows
};

struct LayerNorm {
  Tensor gamma, beta;

  void init(int dim);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  Var apply(Tape& t, Var x) const;
};

struct MhaParams {
  int heads = 1;
  Linear wq, wk, wv, wo;

  void init(int dim, int heads_, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
};

// Scaled dot-product attention with per-head split, concat and output
// projection. q:[Tq,d], k,v:[Tk,d]; causal masks out keys beyond the query
// position (only meaningful when Tq == Tk).
Var multi_head_attention(Tape& t, Var q, Var k, Var v, const MhaParams& p,
                         bool causal);

// Self-attention encoder block with a feed-forward sub-layer and an optional
// depthwise temporal convolution sub-layer, all pre-norm residual.
struct EncoderBlock {
  LayerNorm ln_att, ln_conv, ln_ffn;
  MhaParams att;
  Tensor conv_kernel;  // [kt,d] depthwise; unused when !use_conv
  Linear ffn1, ffn2;
  bool use_conv = true;

  void init(int dim, int heads, int ffn_hidden, int conv_kt, bool use_conv_,
            Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  Var apply(Tape& t, Var x) const;
};

// Standard sinusoidal position table, added to sequence features so the
// attention layers see absolute time.
Tensor sinusoidal_pe(int t, int d);

// Causal self-attention + cross-attention + feed-forward, pre-norm residual.
struct DecoderBlock {
  LayerNorm ln_self, ln_cross, ln_ffn;
  MhaParams self_att, cross_att;
  Linear ffn1, ffn2;

  void init(int dim, int heads, int ffn_hidden, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  Var apply(Tape& t, Var x, Var memory) const;
};

}  // namespace vsr

#endif  // VSR_LAYERS_HPP

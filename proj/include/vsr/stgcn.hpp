#ifndef VSR_STGCN_HPP
#define VSR_STGCN_HPP

#include <string>
#include <vector>

#include "vsr/clips.hpp"
#include "vsr/graph.hpp"
#include "vsr/layers.hpp"

namespace vsr {

// One spatial-temporal graph block: y = mish(tconv(A x W)) (+ x when the
// channel counts match). Weights are shared across nodes, which is what makes
// the block equivariant to graph relabeling.
struct StgcnBlock {
  Tensor w;        // [Cin,Cout]
  Tensor b;        // [Cout]
  Tensor tkernel;  // [kt,Cout,Cout], odd kt, "same" padding
  Tensor tbias;    // [Cout]
  bool residual = false;

  void init(int cin, int cout, int kt, Rng& rng);
  void register_params(ParamRegistry& reg, const std::string& prefix);
  // x:[T,N,Cin] -> [T,N,Cout]
  Var apply(Tape& t, Var x, const kernels::SparseMatrix& adj) const;
};

struct PasrConfig {
  int channels = 64;
  int blocks = 6;
  int temporal_kernel = 5;
  int d_enc = 64;
  int encoder_layers = 2;
  int heads = 4;
  int ffn_hidden = 128;
  bool encoder_conv_block = true;
  int knn = 4;
};

// Landmark-stream encoder: ST-GCN stack over the lip graph, mean-pool over
// nodes, linear + Mish projection, then the shared temporal encoder blocks.
class PasrEncoder {
 public:
  PasrEncoder(const PasrConfig& cfg, const Tensor& template_positions,
              Rng& rng);

  // clip invariants must hold; output [T,d_enc]
  Var encode(Tape& t, const LandmarkClip& clip) const;

  void register_params(ParamRegistry& reg, const std::string& prefix);
  const LipGraph& graph() const { return graph_; }

 private:
  PasrConfig cfg_;
  LipGraph graph_;
  kernels::SparseMatrix adj_;
  std::vector<StgcnBlock> blocks_;
  Linear proj_;
  std::vector<EncoderBlock> encoder_;
};

}  // namespace vsr

#endif  // VSR_STGCN_HPP

#ifndef VSR_TAPE_HPP
#define VSR_TAPE_HPP

#include <functional>
#include <vector>

#include "vsr/kernels.hpp"
#include "vsr/tensor.hpp"

namespace vsr {

class Tape;

// Lightweight handle to a tape node.
struct Var {
  int id = -1;
  Tape* tape = nullptr;
  bool valid() const { return id >= 0 && tape != nullptr; }
};

// Large negative stand-in for log(0); kept finite so every intermediate stays
// finite and the debug finiteness check holds.
inline constexpr double kNegHuge = -1e30;

enum class Conv3dPad { kValid, kSameTemporal, kSame };

struct Conv3dStride {
  int t = 1, h = 1, w = 1;
};

// Reverse-mode tape. Nodes are recorded in execution order, which is a
// topological order by construction; backward() replays them once in reverse.
// Leaves bound to external Tensors accumulate into Tensor::grad, so repeated
// backward calls accumulate until the caller zeroes the gradients.
class Tape {
 public:
  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // leaf bound to external storage; gradients flow into t->grad when
  // t->requires_grad is set. The pointer must outlive the tape.
  Var leaf(Tensor* t);
  // unbound constant; never receives gradient
  Var constant(Tensor v);

  const Tensor& val(Var v) const;
  double scalar(Var v) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // ---- elementwise / affine ----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_rowvec(Var x, Var b);          // x:[m,n] + b:[n] per row
  Var add_const(Var x, const Tensor& c); // constant offset, no grad path
  Var mish(Var x);
  Var relu(Var x);
  Var logaddexp(Var a, Var b);

  // ---- linear algebra ----
  Var matmul(Var a, Var b, bool ta = false, bool tb = false);

  // ---- convolutions ----
  Var conv3d(Var x, Var k, Conv3dStride stride, Conv3dPad pad);
  Var conv1d_nodes(Var x, Var k);  // x:[T,N,Cin], k:[kt,Cin,Cout], odd kt
  Var dwconv1d(Var x, Var k);      // x:[T,C], k:[kt,C], odd kt

  // ---- graph ----
  // adjacency must be symmetric; the matrix must outlive the tape
  Var graph_conv(Var x, const kernels::SparseMatrix& a);  // x:[T,N,C]

  // ---- normalization / softmax ----
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);  // per row
  Var softmax_rows(Var x);
  Var log_softmax_rows(Var x);

  // ---- shape & selection ----
  Var reshape(Var x, std::vector<int> shape);
  Var slice_cols(Var x, int c0, int c1);
  Var concat_cols(const std::vector<Var>& xs);
  Var row(Var x, int r);
  Var shift_right(Var v, int k);                        // -inf style fill
  Var gather_cols(Var x, const std::vector<int>& idx);  // y[i,s]=x[i,idx[s]]
  Var gather_rowwise(Var x, const std::vector<int>& idx);  // y[i]=x[i,idx[i]]
  Var pick(Var x, const std::vector<int>& flat_idx);
  Var embedding(Var table, const std::vector<int>& ids);
  Var time_interp(Var x, int t_out);  // linear resample [Tin,d] -> [t_out,d]

  // ---- reductions ----
  Var mean_hw(Var x);     // [T,H,W,C] -> [T,C]
  Var mean_nodes(Var x);  // [T,N,C] -> [T,C]
  Var mean_cols(Var x);   // [m,n] -> [m]
  Var mean_all(Var x);    // -> scalar
  Var sum_all(Var x);     // -> scalar
  Var neg(Var x) { return scale(x, -1.0); }

  // Seeds d(loss)/d(loss)=1 and sweeps the tape once in reverse. Throws
  // NotScalar unless loss is a single element, DetachedGraph when the handle
  // belongs to another tape.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::function<void()> back;
    bool needs_grad = false;
    Tensor* external = nullptr;
  };

  Var push(Tensor value, bool needs_grad, std::function<void()> back);
  void check_var(Var v) const;
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  std::vector<double>& gbuf(int id);
  const Tensor& v(int id) const {
    return nodes_[static_cast<std::size_t>(id)].value;
  }
  bool needs(Var a) const {
    return nodes_[static_cast<std::size_t>(a.id)].needs_grad;
  }

  std::vector<Node> nodes_;
};

// Central finite-difference check of d(build())/d(inputs). build must create
// a scalar loss on the given tape from the current contents of inputs; every
// input must have requires_grad set. Returns the max over elements of
// |analytic - fd| / max(1, |analytic|, |fd|).
double grad_check(const std::function<Var(Tape&)>& build,
                  const std::vector<Tensor*>& inputs, double eps = 1e-4);

}  // namespace vsr

#endif  // VSR_TAPE_HPP

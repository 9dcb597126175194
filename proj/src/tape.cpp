#include "vsr/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

inline void axpy(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

inline double stable_softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Tensor value, bool needs_grad, std::function<void()> back) {
#ifndef NDEBUG
  assert(value.all_finite() && "non-finite value produced by a forward op");
#endif
  Node nd;
  nd.value = std::move(value);
  nd.needs_grad = needs_grad;
  nd.back = std::move(back);
  nodes_.push_back(std::move(nd));
  return Var{static_cast<int>(nodes_.size()) - 1, this};
}

void Tape::check_var(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw DetachedGraph("variable does not belong to this tape");
}

std::vector<double>& Tape::gbuf(int id) {
  return nodes_[static_cast<std::size_t>(id)].grad;
}

Var Tape::leaf(Tensor* t) {
  Tensor copy(t->shape, t->data);
  Var v = push(std::move(copy), t->requires_grad, nullptr);
  node(v.id).external = t;
  return v;
}

Var Tape::constant(Tensor v) { return push(std::move(v), false, nullptr); }

const Tensor& Tape::val(Var v) const {
  check_var(v);
  return nodes_[static_cast<std::size_t>(v.id)].value;
}

double Tape::scalar(Var v) const {
  const Tensor& t = val(v);
  if (!t.is_scalar()) throw NotScalar("expected a scalar, got " + t.shape_str());
  return t.data[0];
}

// ---- elementwise -------------------------------------------------------------

Var Tape::add(Var a, Var b) {
  check_var(a);
  check_var(b);
  check_shape(v(a.id).same_shape(v(b.id)),
              "add: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  Tensor out(v(a.id).shape);
  for (int i = 0; i < out.size(); ++i)
    out.data[i] = v(a.id).data[i] + v(b.id).data[i];
  const bool an = needs(a), bn = needs(b);
  Var y = push(std::move(out), an || bn, nullptr);
  if (an || bn)
    node(y.id).back = [this, a, b, y, an, bn] {
      const auto& d = gbuf(y.id);
      if (an) axpy(gbuf(a.id), d);
      if (bn) axpy(gbuf(b.id), d);
    };
  return y;
}

Var Tape::sub(Var a, Var b) {
  check_var(a);
  check_var(b);
  check_shape(v(a.id).same_shape(v(b.id)),
              "sub: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  Tensor out(v(a.id).shape);
  for (int i = 0; i < out.size(); ++i)
    out.data[i] = v(a.id).data[i] - v(b.id).data[i];
  const bool an = needs(a), bn = needs(b);
  Var y = push(std::move(out), an || bn, nullptr);
  if (an || bn)
    node(y.id).back = [this, a, b, y, an, bn] {
      const auto& d = gbuf(y.id);
      if (an) axpy(gbuf(a.id), d);
      if (bn) {
        auto& gb = gbuf(b.id);
        for (std::size_t i = 0; i < d.size(); ++i) gb[i] -= d[i];
      }
    };
  return y;
}

Var Tape::mul(Var a, Var b) {
  check_var(a);
  check_var(b);
  check_shape(v(a.id).same_shape(v(b.id)),
              "mul: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  Tensor out(v(a.id).shape);
  for (int i = 0; i < out.size(); ++i)
    out.data[i] = v(a.id).data[i] * v(b.id).data[i];
  const bool an = needs(a), bn = needs(b);
  Var y = push(std::move(out), an || bn, nullptr);
  if (an || bn)
    node(y.id).back = [this, a, b, y, an, bn] {
      const auto& d = gbuf(y.id);
      if (an) {
        auto& ga = gbuf(a.id);
        const auto& bv = v(b.id).data;
        for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * bv[i];
      }
      if (bn) {
        auto& gb = gbuf(b.id);
        const auto& av = v(a.id).data;
        for (std::size_t i = 0; i < d.size(); ++i) gb[i] += d[i] * av[i];
      }
    };
  return y;
}

Var Tape::scale(Var a, double s) {
  check_var(a);
  Tensor out(v(a.id).shape);
  for (int i = 0; i < out.size(); ++i) out.data[i] = v(a.id).data[i] * s;
  const bool an = needs(a);
  Var y = push(std::move(out), an, nullptr);
  if (an)
    node(y.id).back = [this, a, y, s] {
      const auto& d = gbuf(y.id);
      auto& ga = gbuf(a.id);
      for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * s;
    };
  return y;
}

Var Tape::add_rowvec(Var x, Var b) {
  check_var(x);
  check_var(b);
  const Tensor& xv = v(x.id);
  const Tensor& bv = v(b.id);
  check_shape(xv.ndim() >= 1 && bv.ndim() == 1 &&
                  xv.shape.back() == bv.dim(0),
              "add_rowvec: " + xv.shape_str() + " vs " + bv.shape_str());
  const int n = bv.dim(0);
  const int rows = xv.size() / n;
  Tensor out(xv.shape);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < n; ++j)
      out.data[static_cast<std::size_t>(r) * n + j] =
          xv.data[static_cast<std::size_t>(r) * n + j] + bv.data[j];
  const bool xn = needs(x), bn = needs(b);
  Var y = push(std::move(out), xn || bn, nullptr);
  if (xn || bn)
    node(y.id).back = [this, x, b, y, xn, bn, rows, n] {
      const auto& d = gbuf(y.id);
      if (xn) axpy(gbuf(x.id), d);
      if (bn) {
        auto& gb = gbuf(b.id);
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < n; ++j)
            gb[j] += d[static_cast<std::size_t>(r) * n + j];
      }
    };
  return y;
}

Var Tape::add_const(Var x, const Tensor& c) {
  check_var(x);
  check_shape(v(x.id).same_shape(c),
              "add_const: " + v(x.id).shape_str() + " vs " + c.shape_str());
  Tensor out(v(x.id).shape);
  for (int i = 0; i < out.size(); ++i) out.data[i] = v(x.id).data[i] + c.data[i];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y] { axpy(gbuf(x.id), gbuf(y.id)); };
  return y;
}

Var Tape::mish(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  Tensor out(xv.shape);
  for (int i = 0; i < out.size(); ++i) {
    const double xi = xv.data[i];
    if (xi > 30.0) {
      out.data[i] = xi;  // tanh(softplus(x)) == 1 in double precision
    } else {
      out.data[i] = xi * std::tanh(stable_softplus(xi));
    }
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      const auto& xd = v(x.id).data;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double xi = xd[i];
        double deriv;
        if (xi > 30.0) {
          deriv = 1.0;
        } else {
          const double t = std::tanh(stable_softplus(xi));
          deriv = t + xi * (1.0 - t * t) * sigmoid(xi);
        }
        gx[i] += d[i] * deriv;
      }
    };
  return y;
}

Var Tape::relu(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  Tensor out(xv.shape);
  for (int i = 0; i < out.size(); ++i)
    out.data[i] = xv.data[i] > 0.0 ? xv.data[i] : 0.0;
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      const auto& xd = v(x.id).data;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (xd[i] > 0.0) gx[i] += d[i];
    };
  return y;
}

Var Tape::logaddexp(Var a, Var b) {
  check_var(a);
  check_var(b);
  check_shape(v(a.id).same_shape(v(b.id)), "logaddexp: shape mismatch");
  Tensor out(v(a.id).shape);
  for (int i = 0; i < out.size(); ++i) {
    const double av = v(a.id).data[i], bv = v(b.id).data[i];
    const double hi = std::max(av, bv), lo = std::min(av, bv);
    out.data[i] = hi + std::log1p(std::exp(lo - hi));
  }
  const bool an = needs(a), bn = needs(b);
  Var y = push(std::move(out), an || bn, nullptr);
  if (an || bn)
    node(y.id).back = [this, a, b, y, an, bn] {
      const auto& d = gbuf(y.id);
      const auto& yv = v(y.id).data;
      if (an) {
        auto& ga = gbuf(a.id);
        const auto& av = v(a.id).data;
        for (std::size_t i = 0; i < d.size(); ++i)
          ga[i] += d[i] * std::exp(av[i] - yv[i]);
      }
      if (bn) {
        auto& gb = gbuf(b.id);
        const auto& bv = v(b.id).data;
        for (std::size_t i = 0; i < d.size(); ++i)
          gb[i] += d[i] * std::exp(bv[i] - yv[i]);
      }
    };
  return y;
}

// ---- matmul ------------------------------------------------------------------

Var Tape::matmul(Var a, Var b, bool ta, bool tb) {
  check_var(a);
  check_var(b);
  const Tensor& av = v(a.id);
  const Tensor& bv = v(b.id);
  check_shape(av.ndim() == 2 && bv.ndim() == 2, "matmul: expects 2-D operands");
  const int m = ta ? av.dim(1) : av.dim(0);
  const int k = ta ? av.dim(0) : av.dim(1);
  const int kb = tb ? bv.dim(1) : bv.dim(0);
  const int n = tb ? bv.dim(0) : bv.dim(1);
  check_shape(k == kb, "matmul: inner dims " + av.shape_str() + " x " +
                           bv.shape_str());
  Tensor out({m, n});
  kernels::matmul(av.data.data(), bv.data.data(), out.data.data(), m, k, n, ta,
                  tb);
  const bool an = needs(a), bn = needs(b);
  Var y = push(std::move(out), an || bn, nullptr);
  if (an || bn)
    node(y.id).back = [this, a, b, y, ta, tb, m, k, n, an, bn] {
      const auto& d = gbuf(y.id);
      if (an) {
        std::vector<double> tmp(v(a.id).data.size());
        if (!ta) {
          // dA = dC * op(B)^T
          kernels::matmul(d.data(), v(b.id).data.data(), tmp.data(), m, n, k,
                          false, !tb);
        } else {
          // stored A^T gradient: dA_stored = op(B) * dC^T
          kernels::matmul(v(b.id).data.data(), d.data(), tmp.data(), k, n, m,
                          tb, true);
        }
        axpy(gbuf(a.id), tmp);
      }
      if (bn) {
        std::vector<double> tmp(v(b.id).data.size());
        if (!tb) {
          // dB = op(A)^T * dC
          kernels::matmul(v(a.id).data.data(), d.data(), tmp.data(), k, m, n,
                          !ta, false);
        } else {
          // stored B^T gradient: dB_stored = dC^T * op(A)
          kernels::matmul(d.data(), v(a.id).data.data(), tmp.data(), n, m, k,
                          true, ta);
        }
        axpy(gbuf(b.id), tmp);
      }
    };
  return y;
}

// ---- convolutions ------------------------------------------------------------

namespace {

void out_extent(int in, int k, int s, bool same, int* out, int* pad) {
  if (same) {
    *out = (in + s - 1) / s;
    const int total = std::max(0, (*out - 1) * s + k - in);
    *pad = total / 2;
  } else {
    if (in < k) throw ShapeMismatch("conv: kernel does not fit input");
    *out = (in - k) / s + 1;
    *pad = 0;
  }
}

}  // namespace

Var Tape::conv3d(Var x, Var k, Conv3dStride stride, Conv3dPad pad) {
  check_var(x);
  check_var(k);
  const Tensor& xv = v(x.id);
  const Tensor& kv = v(k.id);
  check_shape(xv.ndim() == 4, "conv3d: input must be [T,H,W,Cin]");
  check_shape(kv.ndim() == 5, "conv3d: kernel must be [kt,kh,kw,Cin,Cout]");
  check_shape(kv.dim(3) == xv.dim(3), "conv3d: Cin mismatch");
  if (stride.t < 1 || stride.h < 1 || stride.w < 1)
    throw InvalidStride("conv3d: stride components must be >= 1");
  kernels::Conv3dDims d;
  d.t = xv.dim(0);
  d.h = xv.dim(1);
  d.w = xv.dim(2);
  d.cin = xv.dim(3);
  d.kt = kv.dim(0);
  d.kh = kv.dim(1);
  d.kw = kv.dim(2);
  d.cout = kv.dim(4);
  d.st = stride.t;
  d.sh = stride.h;
  d.sw = stride.w;
  const bool same_t = pad != Conv3dPad::kValid;
  const bool same_s = pad == Conv3dPad::kSame;
  out_extent(d.t, d.kt, d.st, same_t, &d.to, &d.pt);
  out_extent(d.h, d.kh, d.sh, same_s, &d.ho, &d.ph);
  out_extent(d.w, d.kw, d.sw, same_s, &d.wo, &d.pw);
  Tensor out({d.to, d.ho, d.wo, d.cout});
  kernels::conv3d_forward(xv.data.data(), kv.data.data(), out.data.data(), d);
  const bool xn = needs(x), kn = needs(k);
  Var y = push(std::move(out), xn || kn, nullptr);
  if (xn || kn)
    node(y.id).back = [this, x, k, y, d, xn, kn] {
      const auto& dy = gbuf(y.id);
      if (xn) {
        std::vector<double> tmp(v(x.id).data.size());
        kernels::conv3d_backward_input(dy.data(), v(k.id).data.data(),
                                       tmp.data(), d);
        axpy(gbuf(x.id), tmp);
      }
      if (kn) {
        std::vector<double> tmp(v(k.id).data.size());
        kernels::conv3d_backward_kernel(dy.data(), v(x.id).data.data(),
                                        tmp.data(), d);
        axpy(gbuf(k.id), tmp);
      }
    };
  return y;
}

Var Tape::conv1d_nodes(Var x, Var k) {
  check_var(x);
  check_var(k);
  const Tensor& xv = v(x.id);
  const Tensor& kv = v(k.id);
  check_shape(xv.ndim() == 3, "conv1d_nodes: input must be [T,N,C]");
  check_shape(kv.ndim() == 3, "conv1d_nodes: kernel must be [kt,Cin,Cout]");
  check_shape(kv.dim(1) == xv.dim(2), "conv1d_nodes: Cin mismatch");
  check_shape(kv.dim(0) % 2 == 1, "conv1d_nodes: temporal kernel must be odd");
  const int t = xv.dim(0), n = xv.dim(1), cin = xv.dim(2);
  const int kt = kv.dim(0), cout = kv.dim(2);
  Tensor out({t, n, cout});
  kernels::conv1d_nodes_forward(xv.data.data(), kv.data.data(), out.data.data(),
                                t, n, cin, kt, cout);
  const bool xn = needs(x), kn = needs(k);
  Var y = push(std::move(out), xn || kn, nullptr);
  if (xn || kn)
    node(y.id).back = [this, x, k, y, t, n, cin, kt, cout, xn, kn] {
      const auto& dy = gbuf(y.id);
      if (xn) {
        std::vector<double> tmp(v(x.id).data.size());
        kernels::conv1d_nodes_backward_input(dy.data(), v(k.id).data.data(),
                                             tmp.data(), t, n, cin, kt, cout);
        axpy(gbuf(x.id), tmp);
      }
      if (kn) {
        std::vector<double> tmp(v(k.id).data.size());
        kernels::conv1d_nodes_backward_kernel(dy.data(), v(x.id).data.data(),
                                              tmp.data(), t, n, cin, kt, cout);
        axpy(gbuf(k.id), tmp);
      }
    };
  return y;
}

Var Tape::dwconv1d(Var x, Var k) {
  check_var(x);
  check_var(k);
  const Tensor& xv = v(x.id);
  const Tensor& kv = v(k.id);
  check_shape(xv.ndim() == 2, "dwconv1d: input must be [T,C]");
  check_shape(kv.ndim() == 2 && kv.dim(1) == xv.dim(1),
              "dwconv1d: kernel must be [kt,C]");
  check_shape(kv.dim(0) % 2 == 1, "dwconv1d: temporal kernel must be odd");
  const int t = xv.dim(0), c = xv.dim(1), kt = kv.dim(0);
  Tensor out({t, c});
  kernels::dwconv1d_forward(xv.data.data(), kv.data.data(), out.data.data(), t,
                            c, kt);
  const bool xn = needs(x), kn = needs(k);
  Var y = push(std::move(out), xn || kn, nullptr);
  if (xn || kn)
    node(y.id).back = [this, x, k, y, t, c, kt, xn, kn] {
      const auto& dy = gbuf(y.id);
      if (xn) {
        std::vector<double> tmp(v(x.id).data.size());
        kernels::dwconv1d_backward_input(dy.data(), v(k.id).data.data(),
                                         tmp.data(), t, c, kt);
        axpy(gbuf(x.id), tmp);
      }
      if (kn) {
        std::vector<double> tmp(v(k.id).data.size());
        kernels::dwconv1d_backward_kernel(dy.data(), v(x.id).data.data(),
                                          tmp.data(), t, c, kt);
        axpy(gbuf(k.id), tmp);
      }
    };
  return y;
}

Var Tape::graph_conv(Var x, const kernels::SparseMatrix& a) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 3, "graph_conv: input must be [T,N,C]");
  check_shape(xv.dim(1) == a.n, "graph_conv: node count mismatch");
  const int t = xv.dim(0), c = xv.dim(2);
  Tensor out(xv.shape);
  kernels::graph_conv_forward(xv.data.data(), a, out.data.data(), t, c);
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, &a, t, c] {
      std::vector<double> tmp(v(x.id).data.size());
      kernels::graph_conv_backward(gbuf(y.id).data(), a, tmp.data(), t, c);
      axpy(gbuf(x.id), tmp);
    };
  return y;
}

// ---- normalization / softmax ---------------------------------------------------

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  check_var(x);
  check_var(gamma);
  check_var(beta);
  const Tensor& xv = v(x.id);
  const int n = xv.shape.back();
  const int rows = xv.size() / n;
  check_shape(v(gamma.id).size() == n && v(beta.id).size() == n,
              "layer_norm: affine params must match last dim");
  Tensor out(xv.shape);
  std::vector<double> xhat(xv.data.size());
  std::vector<double> inv(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const double* xp = xv.data.data() + static_cast<std::size_t>(r) * n;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += xp[j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xp[j] - mu) * (xp[j] - mu);
    var /= n;
    const double iv = 1.0 / std::sqrt(var + eps);
    inv[static_cast<std::size_t>(r)] = iv;
    for (int j = 0; j < n; ++j) {
      const std::size_t o = static_cast<std::size_t>(r) * n + j;
      xhat[o] = (xp[j] - mu) * iv;
      out.data[o] = v(gamma.id).data[j] * xhat[o] + v(beta.id).data[j];
    }
  }
  const bool xn = needs(x), gn = needs(gamma), bn = needs(beta);
  Var y = push(std::move(out), xn || gn || bn, nullptr);
  if (xn || gn || bn)
    node(y.id).back = [this, x, gamma, beta, y, rows, n, xn, gn, bn,
                       xhat = std::move(xhat), inv = std::move(inv)] {
      const auto& d = gbuf(y.id);
      const auto& gv = v(gamma.id).data;
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * n;
        const double iv = inv[static_cast<std::size_t>(r)];
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int j = 0; j < n; ++j) {
          const double dxh = d[base + j] * gv[j];
          sum_dxhat += dxh;
          sum_dxhat_xhat += dxh * xhat[base + j];
        }
        if (xn) {
          auto& gx = gbuf(x.id);
          for (int j = 0; j < n; ++j) {
            const double dxh = d[base + j] * gv[j];
            gx[base + j] += iv * (dxh - sum_dxhat / n -
                                  xhat[base + j] * sum_dxhat_xhat / n);
          }
        }
        if (gn) {
          auto& gg = gbuf(gamma.id);
          for (int j = 0; j < n; ++j) gg[j] += d[base + j] * xhat[base + j];
        }
        if (bn) {
          auto& gb = gbuf(beta.id);
          for (int j = 0; j < n; ++j) gb[j] += d[base + j];
        }
      }
    };
  return y;
}

Var Tape::softmax_rows(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  const int n = xv.shape.back();
  const int rows = xv.size() / n;
  Tensor out(xv.shape);
  for (int r = 0; r < rows; ++r) {
    const double* xp = xv.data.data() + static_cast<std::size_t>(r) * n;
    double* yp = out.data.data() + static_cast<std::size_t>(r) * n;
    double mx = xp[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, xp[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      yp[j] = std::exp(xp[j] - mx);
      z += yp[j];
    }
    for (int j = 0; j < n; ++j) yp[j] /= z;
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, rows, n] {
      const auto& d = gbuf(y.id);
      const auto& yv = v(y.id).data;
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += d[base + j] * yv[base + j];
        for (int j = 0; j < n; ++j)
          gx[base + j] += yv[base + j] * (d[base + j] - dot);
      }
    };
  return y;
}

Var Tape::log_softmax_rows(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  const int n = xv.shape.back();
  const int rows = xv.size() / n;
  Tensor out(xv.shape);
  for (int r = 0; r < rows; ++r) {
    const double* xp = xv.data.data() + static_cast<std::size_t>(r) * n;
    double* yp = out.data.data() + static_cast<std::size_t>(r) * n;
    double mx = xp[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, xp[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(xp[j] - mx);
    const double lse = mx + std::log(z);
    for (int j = 0; j < n; ++j) yp[j] = xp[j] - lse;
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, rows, n] {
      const auto& d = gbuf(y.id);
      const auto& yv = v(y.id).data;
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * n;
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += d[base + j];
        for (int j = 0; j < n; ++j)
          gx[base + j] += d[base + j] - std::exp(yv[base + j]) * sum;
      }
    };
  return y;
}

// ---- shape & selection ---------------------------------------------------------

Var Tape::reshape(Var x, std::vector<int> shape) {
  check_var(x);
  check_shape(shape_product(shape) == v(x.id).size(),
              "reshape: element count mismatch");
  Tensor out(std::move(shape), v(x.id).data);
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y] { axpy(gbuf(x.id), gbuf(y.id)); };
  return y;
}

Var Tape::slice_cols(Var x, int c0, int c1) {
  check_var(x);
  const Tensor& xv = v(x.id);
  const int n = xv.shape.back();
  check_shape(0 <= c0 && c0 < c1 && c1 <= n, "slice_cols: bad range");
  const int rows = xv.size() / n;
  const int w = c1 - c0;
  std::vector<int> shape = xv.shape;
  shape.back() = w;
  Tensor out(shape);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < w; ++j)
      out.data[static_cast<std::size_t>(r) * w + j] =
          xv.data[static_cast<std::size_t>(r) * n + c0 + j];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, rows, n, w, c0] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < w; ++j)
          gx[static_cast<std::size_t>(r) * n + c0 + j] +=
              d[static_cast<std::size_t>(r) * w + j];
    };
  return y;
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
  check_shape(!xs.empty(), "concat_cols: empty input list");
  int rows = -1;
  int total = 0;
  bool any = false;
  for (Var x : xs) {
    check_var(x);
    const Tensor& xv = v(x.id);
    const int n = xv.shape.back();
    const int r = xv.size() / n;
    if (rows < 0) rows = r;
    check_shape(rows == r, "concat_cols: row mismatch");
    total += n;
    any = any || needs(x);
  }
  Tensor out({rows, total});
  int off = 0;
  for (Var x : xs) {
    const Tensor& xv = v(x.id);
    const int n = xv.shape.back();
    for (int r = 0; r < rows; ++r)
      for (int j = 0; j < n; ++j)
        out.data[static_cast<std::size_t>(r) * total + off + j] =
            xv.data[static_cast<std::size_t>(r) * n + j];
    off += n;
  }
  Var y = push(std::move(out), any, nullptr);
  if (any)
    node(y.id).back = [this, xs, y, rows, total] {
      const auto& d = gbuf(y.id);
      int off = 0;
      for (Var x : xs) {
        const int n = v(x.id).shape.back();
        if (needs(x)) {
          auto& gx = gbuf(x.id);
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < n; ++j)
              gx[static_cast<std::size_t>(r) * n + j] +=
                  d[static_cast<std::size_t>(r) * total + off + j];
        }
        off += n;
      }
    };
  return y;
}

Var Tape::row(Var x, int r) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 2 && 0 <= r && r < xv.dim(0), "row: bad index");
  const int n = xv.dim(1);
  Tensor out({n});
  for (int j = 0; j < n; ++j)
    out.data[j] = xv.data[static_cast<std::size_t>(r) * n + j];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, r, n] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int j = 0; j < n; ++j) gx[static_cast<std::size_t>(r) * n + j] += d[j];
    };
  return y;
}

Var Tape::shift_right(Var x, int k) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 1 && k >= 0, "shift_right: expects 1-D, k >= 0");
  const int n = xv.dim(0);
  Tensor out({n});
  for (int i = 0; i < n; ++i)
    out.data[i] = i >= k ? xv.data[i - k] : kNegHuge;
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, n, k] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int i = k; i < n; ++i) gx[i - k] += d[i];
    };
  return y;
}

Var Tape::gather_cols(Var x, const std::vector<int>& idx) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 2, "gather_cols: expects 2-D input");
  const int n = xv.dim(1);
  const int rows = xv.dim(0);
  const int s = static_cast<int>(idx.size());
  for (int j : idx) check_shape(0 <= j && j < n, "gather_cols: index range");
  Tensor out({rows, s});
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < s; ++j)
      out.data[static_cast<std::size_t>(r) * s + j] =
          xv.data[static_cast<std::size_t>(r) * n + idx[j]];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, idx, rows, n, s] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < s; ++j)
          gx[static_cast<std::size_t>(r) * n + idx[j]] +=
              d[static_cast<std::size_t>(r) * s + j];
    };
  return y;
}

Var Tape::gather_rowwise(Var x, const std::vector<int>& idx) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 2, "gather_rowwise: expects 2-D input");
  const int rows = xv.dim(0);
  const int n = xv.dim(1);
  check_shape(static_cast<int>(idx.size()) == rows,
              "gather_rowwise: one index per row");
  for (int j : idx) check_shape(0 <= j && j < n, "gather_rowwise: index range");
  Tensor out({rows});
  for (int r = 0; r < rows; ++r)
    out.data[r] = xv.data[static_cast<std::size_t>(r) * n + idx[r]];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, idx, rows, n] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r)
        gx[static_cast<std::size_t>(r) * n + idx[r]] += d[r];
    };
  return y;
}

Var Tape::pick(Var x, const std::vector<int>& flat_idx) {
  check_var(x);
  const Tensor& xv = v(x.id);
  for (int j : flat_idx)
    check_shape(0 <= j && j < xv.size(), "pick: index range");
  Tensor out({static_cast<int>(flat_idx.size())});
  for (std::size_t i = 0; i < flat_idx.size(); ++i)
    out.data[i] = xv.data[static_cast<std::size_t>(flat_idx[i])];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, flat_idx] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (std::size_t i = 0; i < flat_idx.size(); ++i)
        gx[static_cast<std::size_t>(flat_idx[i])] += d[i];
    };
  return y;
}

Var Tape::embedding(Var table, const std::vector<int>& ids) {
  check_var(table);
  const Tensor& tv = v(table.id);
  check_shape(tv.ndim() == 2, "embedding: table must be 2-D");
  const int voc = tv.dim(0), d = tv.dim(1);
  for (int i : ids) check_shape(0 <= i && i < voc, "embedding: id range");
  const int rows = static_cast<int>(ids.size());
  Tensor out({rows, d});
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < d; ++j)
      out.data[static_cast<std::size_t>(r) * d + j] =
          tv.data[static_cast<std::size_t>(ids[r]) * d + j];
  const bool tn = needs(table);
  Var y = push(std::move(out), tn, nullptr);
  if (tn)
    node(y.id).back = [this, table, y, ids, rows, d] {
      const auto& dg = gbuf(y.id);
      auto& gt = gbuf(table.id);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < d; ++j)
          gt[static_cast<std::size_t>(ids[r]) * d + j] +=
              dg[static_cast<std::size_t>(r) * d + j];
    };
  return y;
}

Var Tape::time_interp(Var x, int t_out) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 2, "time_interp: expects [T,d]");
  check_shape(t_out >= 1, "time_interp: t_out must be >= 1");
  const int t_in = xv.dim(0), d = xv.dim(1);
  std::vector<int> lo(static_cast<std::size_t>(t_out));
  std::vector<int> hi(static_cast<std::size_t>(t_out));
  std::vector<double> w(static_cast<std::size_t>(t_out));
  for (int i = 0; i < t_out; ++i) {
    const double pos = (t_out == 1)
                           ? 0.0
                           : static_cast<double>(i) * (t_in - 1) / (t_out - 1);
    const int l = std::min(static_cast<int>(pos), t_in - 1);
    lo[i] = l;
    hi[i] = std::min(l + 1, t_in - 1);
    w[i] = pos - l;
  }
  Tensor out({t_out, d});
  for (int i = 0; i < t_out; ++i)
    for (int j = 0; j < d; ++j)
      out.data[static_cast<std::size_t>(i) * d + j] =
          (1.0 - w[i]) * xv.data[static_cast<std::size_t>(lo[i]) * d + j] +
          w[i] * xv.data[static_cast<std::size_t>(hi[i]) * d + j];
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, t_out, d, lo = std::move(lo),
                       hi = std::move(hi), w = std::move(w)] {
      const auto& dg = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int i = 0; i < t_out; ++i)
        for (int j = 0; j < d; ++j) {
          const double g = dg[static_cast<std::size_t>(i) * d + j];
          gx[static_cast<std::size_t>(lo[i]) * d + j] += (1.0 - w[i]) * g;
          gx[static_cast<std::size_t>(hi[i]) * d + j] += w[i] * g;
        }
    };
  return y;
}

// ---- reductions ----------------------------------------------------------------

Var Tape::mean_hw(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 4, "mean_hw: expects [T,H,W,C]");
  const int t = xv.dim(0), h = xv.dim(1), w = xv.dim(2), c = xv.dim(3);
  const double norm = 1.0 / (static_cast<double>(h) * w);
  Tensor out({t, c});
  for (int ti = 0; ti < t; ++ti) {
    double* yp = out.data.data() + static_cast<std::size_t>(ti) * c;
    for (int j = 0; j < c; ++j) yp[j] = 0.0;
    const double* xp = xv.data.data() + static_cast<std::size_t>(ti) * h * w * c;
    for (int s = 0; s < h * w; ++s)
      for (int j = 0; j < c; ++j) yp[j] += xp[static_cast<std::size_t>(s) * c + j];
    for (int j = 0; j < c; ++j) yp[j] *= norm;
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, t, h, w, c, norm] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int ti = 0; ti < t; ++ti)
        for (int s = 0; s < h * w; ++s)
          for (int j = 0; j < c; ++j)
            gx[(static_cast<std::size_t>(ti) * h * w + s) * c + j] +=
                d[static_cast<std::size_t>(ti) * c + j] * norm;
    };
  return y;
}

Var Tape::mean_nodes(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 3, "mean_nodes: expects [T,N,C]");
  const int t = xv.dim(0), n = xv.dim(1), c = xv.dim(2);
  const double norm = 1.0 / n;
  Tensor out({t, c});
  for (int ti = 0; ti < t; ++ti) {
    double* yp = out.data.data() + static_cast<std::size_t>(ti) * c;
    for (int j = 0; j < c; ++j) yp[j] = 0.0;
    const double* xp = xv.data.data() + static_cast<std::size_t>(ti) * n * c;
    for (int ni = 0; ni < n; ++ni)
      for (int j = 0; j < c; ++j) yp[j] += xp[static_cast<std::size_t>(ni) * c + j];
    for (int j = 0; j < c; ++j) yp[j] *= norm;
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, t, n, c, norm] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int ti = 0; ti < t; ++ti)
        for (int ni = 0; ni < n; ++ni)
          for (int j = 0; j < c; ++j)
            gx[(static_cast<std::size_t>(ti) * n + ni) * c + j] +=
                d[static_cast<std::size_t>(ti) * c + j] * norm;
    };
  return y;
}

Var Tape::mean_cols(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  check_shape(xv.ndim() == 2, "mean_cols: expects 2-D");
  const int rows = xv.dim(0), n = xv.dim(1);
  Tensor out({rows});
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += xv.data[static_cast<std::size_t>(r) * n + j];
    out.data[r] = s / n;
  }
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, rows, n] {
      const auto& d = gbuf(y.id);
      auto& gx = gbuf(x.id);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < n; ++j)
          gx[static_cast<std::size_t>(r) * n + j] += d[r] / n;
    };
  return y;
}

Var Tape::mean_all(Var x) {
  check_var(x);
  const Tensor& xv = v(x.id);
  const int n = xv.size();
  double s = 0.0;
  for (double t : xv.data) s += t;
  Tensor out = Tensor::scalar(s / n);
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y, n] {
      const double d = gbuf(y.id)[0] / n;
      auto& gx = gbuf(x.id);
      for (auto& g : gx) g += d;
    };
  return y;
}

Var Tape::sum_all(Var x) {
  check_var(x);
  double s = 0.0;
  for (double t : v(x.id).data) s += t;
  Tensor out = Tensor::scalar(s);
  const bool xn = needs(x);
  Var y = push(std::move(out), xn, nullptr);
  if (xn)
    node(y.id).back = [this, x, y] {
      const double d = gbuf(y.id)[0];
      auto& gx = gbuf(x.id);
      for (auto& g : gx) g += d;
    };
  return y;
}

// ---- backward -------------------------------------------------------------------

void Tape::backward(Var loss) {
  check_var(loss);
  Node& ln = node(loss.id);
  if (ln.value.size() != 1)
    throw NotScalar("backward: loss must be scalar, got " +
                    ln.value.shape_str());
  if (!ln.needs_grad)
    throw DetachedGraph("backward: loss does not depend on any differentiable leaf");
  for (int i = 0; i <= loss.id; ++i) {
    Node& nd = nodes_[static_cast<std::size_t>(i)];
    if (nd.needs_grad) nd.grad.assign(nd.value.data.size(), 0.0);
  }
  ln.grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& nd = nodes_[static_cast<std::size_t>(i)];
    if (nd.needs_grad && nd.back) nd.back();
  }
  for (int i = 0; i <= loss.id; ++i) {
    Node& nd = nodes_[static_cast<std::size_t>(i)];
    if (nd.external && nd.external->requires_grad)
      nd.external->accumulate_grad(nd.grad);
  }
}

// ---- finite differences -----------------------------------------------------------

double grad_check(const std::function<Var(Tape&)>& build,
                  const std::vector<Tensor*>& inputs, double eps) {
  for (Tensor* t : inputs) {
    t->requires_grad = true;
    t->grad.reset();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
  }
  analytic.reserve(inputs.size());
  for (Tensor* t : inputs) {
    if (t->grad)
      analytic.push_back(*t->grad);
    else
      analytic.emplace_back(t->data.size(), 0.0);
  }

  auto eval = [&build]() {
    Tape tape;
    Var loss = build(tape);
    return tape.scalar(loss);
  };

  double max_err = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Tensor* t = inputs[i];
    for (std::size_t e = 0; e < t->data.size(); ++e) {
      const double orig = t->data[e];
      t->data[e] = orig + eps;
      const double fp = eval();
      t->data[e] = orig - eps;
      const double fm = eval();
      t->data[e] = orig;
      const double fd = (fp - fm) / (2.0 * eps);
      const double an = analytic[i][e];
      const double err =
          std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace vsr

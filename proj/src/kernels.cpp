#include "vsr/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vsr::kernels {

namespace {
#ifdef _OPENMP
bool g_parallel = true;
#else
bool g_parallel = false;
#endif
}  // namespace

void set_parallel(bool enabled) {
#ifdef _OPENMP
  g_parallel = enabled;
#else
  (void)enabled;
  g_parallel = false;
#endif
}

bool parallel_enabled() { return g_parallel; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---- matmul ----------------------------------------------------------------

namespace {

// One row of C; identical inner order for serial and parallel paths.
inline void matmul_row(const double* a, const double* b, double* c, int i,
                       int k, int n, bool ta, bool tb, int m) {
  double* crow = c + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) crow[j] = 0.0;
  if (!tb) {
    // C[i,:] += A[i,l] * B[l,:]
    for (int l = 0; l < k; ++l) {
      const double av = ta ? a[static_cast<std::size_t>(l) * m + i]
                           : a[static_cast<std::size_t>(i) * k + l];
      const double* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  } else {
    // C[i,j] = dot(A-row-or-col, B[j,:])
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      if (!ta) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
      } else {
        for (int l = 0; l < k; ++l)
          acc += a[static_cast<std::size_t>(l) * m + i] * brow[l];
      }
      crow[j] = acc;
    }
  }
}

}  // namespace

void matmul_serial(const double* a, const double* b, double* c, int m, int k,
                   int n, bool ta, bool tb) {
  for (int i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n, ta, tb, m);
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool ta, bool tb) {
  if (!g_parallel || m < 2) {
    matmul_serial(a, b, c, m, k, n, ta, tb);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n, ta, tb, m);
}

// ---- conv3d ----------------------------------------------------------------

namespace {

inline void conv3d_out_row(const double* x, const double* k, double* y,
                           const Conv3dDims& d, int to, int ho) {
  const std::size_t krow = static_cast<std::size_t>(d.cin) * d.cout;
  for (int wo = 0; wo < d.wo; ++wo) {
    double* yrow =
        y + ((static_cast<std::size_t>(to) * d.ho + ho) * d.wo + wo) * d.cout;
    for (int co = 0; co < d.cout; ++co) yrow[co] = 0.0;
    const int t0 = to * d.st - d.pt;
    const int h0 = ho * d.sh - d.ph;
    const int w0 = wo * d.sw - d.pw;
    for (int dt = 0; dt < d.kt; ++dt) {
      const int ti = t0 + dt;
      if (ti < 0 || ti >= d.t) continue;
      for (int dh = 0; dh < d.kh; ++dh) {
        const int hi = h0 + dh;
        if (hi < 0 || hi >= d.h) continue;
        for (int dw = 0; dw < d.kw; ++dw) {
          const int wi = w0 + dw;
          if (wi < 0 || wi >= d.w) continue;
          const double* xp =
              x + ((static_cast<std::size_t>(ti) * d.h + hi) * d.w + wi) * d.cin;
          const double* kp =
              k + ((static_cast<std::size_t>(dt) * d.kh + dh) * d.kw + dw) * krow;
          for (int ci = 0; ci < d.cin; ++ci) {
            const double xv = xp[ci];
            const double* kc = kp + static_cast<std::size_t>(ci) * d.cout;
            for (int co = 0; co < d.cout; ++co) yrow[co] += xv * kc[co];
          }
        }
      }
    }
  }
}

}  // namespace

void conv3d_forward_serial(const double* x, const double* k, double* y,
                           const Conv3dDims& d) {
  for (int to = 0; to < d.to; ++to)
    for (int ho = 0; ho < d.ho; ++ho) conv3d_out_row(x, k, y, d, to, ho);
}

void conv3d_forward(const double* x, const double* k, double* y,
                    const Conv3dDims& d) {
  if (!g_parallel || d.to * d.ho < 2) {
    conv3d_forward_serial(x, k, y, d);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int to = 0; to < d.to; ++to)
    for (int ho = 0; ho < d.ho; ++ho) conv3d_out_row(x, k, y, d, to, ho);
}

namespace {

inline void conv3d_dx_row(const double* dy, const double* k, double* dx,
                          const Conv3dDims& d, int ti, int hi) {
  const std::size_t krow = static_cast<std::size_t>(d.cin) * d.cout;
  for (int wi = 0; wi < d.w; ++wi) {
    double* dxp =
        dx + ((static_cast<std::size_t>(ti) * d.h + hi) * d.w + wi) * d.cin;
    for (int ci = 0; ci < d.cin; ++ci) dxp[ci] = 0.0;
    for (int dt = 0; dt < d.kt; ++dt) {
      const int tn = ti + d.pt - dt;
      if (tn % d.st != 0) continue;
      const int to = tn / d.st;
      if (to < 0 || to >= d.to) continue;
      for (int dh = 0; dh < d.kh; ++dh) {
        const int hn = hi + d.ph - dh;
        if (hn % d.sh != 0) continue;
        const int ho = hn / d.sh;
        if (ho < 0 || ho >= d.ho) continue;
        for (int dw = 0; dw < d.kw; ++dw) {
          const int wn = wi + d.pw - dw;
          if (wn % d.sw != 0) continue;
          const int wo = wn / d.sw;
          if (wo < 0 || wo >= d.wo) continue;
          const double* dyp =
              dy +
              ((static_cast<std::size_t>(to) * d.ho + ho) * d.wo + wo) * d.cout;
          const double* kp =
              k + ((static_cast<std::size_t>(dt) * d.kh + dh) * d.kw + dw) * krow;
          for (int ci = 0; ci < d.cin; ++ci) {
            const double* kc = kp + static_cast<std::size_t>(ci) * d.cout;
            double acc = 0.0;
            for (int co = 0; co < d.cout; ++co) acc += dyp[co] * kc[co];
            dxp[ci] += acc;
          }
        }
      }
    }
  }
}

}  // namespace

void conv3d_backward_input(const double* dy, const double* k, double* dx,
                           const Conv3dDims& d) {
  if (!g_parallel || d.t * d.h < 2) {
    for (int ti = 0; ti < d.t; ++ti)
      for (int hi = 0; hi < d.h; ++hi) conv3d_dx_row(dy, k, dx, d, ti, hi);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int ti = 0; ti < d.t; ++ti)
    for (int hi = 0; hi < d.h; ++hi) conv3d_dx_row(dy, k, dx, d, ti, hi);
}

namespace {

// dK for one (dt,dh,dw) tap: full sweep over outputs in fixed order.
inline void conv3d_dk_tap(const double* dy, const double* x, double* dk,
                          const Conv3dDims& d, int dt, int dh, int dw) {
  const std::size_t krow = static_cast<std::size_t>(d.cin) * d.cout;
  double* dkp =
      dk + ((static_cast<std::size_t>(dt) * d.kh + dh) * d.kw + dw) * krow;
  for (std::size_t i = 0; i < krow; ++i) dkp[i] = 0.0;
  for (int to = 0; to < d.to; ++to) {
    const int ti = to * d.st - d.pt + dt;
    if (ti < 0 || ti >= d.t) continue;
    for (int ho = 0; ho < d.ho; ++ho) {
      const int hi = ho * d.sh - d.ph + dh;
      if (hi < 0 || hi >= d.h) continue;
      for (int wo = 0; wo < d.wo; ++wo) {
        const int wi = wo * d.sw - d.pw + dw;
        if (wi < 0 || wi >= d.w) continue;
        const double* xp =
            x + ((static_cast<std::size_t>(ti) * d.h + hi) * d.w + wi) * d.cin;
        const double* dyp =
            dy +
            ((static_cast<std::size_t>(to) * d.ho + ho) * d.wo + wo) * d.cout;
        for (int ci = 0; ci < d.cin; ++ci) {
          const double xv = xp[ci];
          double* dkc = dkp + static_cast<std::size_t>(ci) * d.cout;
          for (int co = 0; co < d.cout; ++co) dkc[co] += xv * dyp[co];
        }
      }
    }
  }
}

}  // namespace

void conv3d_backward_kernel(const double* dy, const double* x, double* dk,
                            const Conv3dDims& d) {
  const int taps = d.kt * d.kh * d.kw;
  if (!g_parallel || taps < 2) {
    for (int dt = 0; dt < d.kt; ++dt)
      for (int dh = 0; dh < d.kh; ++dh)
        for (int dw = 0; dw < d.kw; ++dw) conv3d_dk_tap(dy, x, dk, d, dt, dh, dw);
    return;
  }
#pragma omp parallel for collapse(3) schedule(static)
  for (int dt = 0; dt < d.kt; ++dt)
    for (int dh = 0; dh < d.kh; ++dh)
      for (int dw = 0; dw < d.kw; ++dw) conv3d_dk_tap(dy, x, dk, d, dt, dh, dw);
}

// ---- conv1d over nodes -------------------------------------------------------

namespace {

inline void conv1d_nodes_cell(const double* x, const double* k, double* y,
                              int t, int n, int cin, int kt, int cout, int ti,
                              int ni) {
  const int off = kt / 2;
  double* yp = y + (static_cast<std::size_t>(ti) * n + ni) * cout;
  for (int co = 0; co < cout; ++co) yp[co] = 0.0;
  for (int dt = 0; dt < kt; ++dt) {
    const int src = ti + dt - off;
    if (src < 0 || src >= t) continue;
    const double* xp = x + (static_cast<std::size_t>(src) * n + ni) * cin;
    const double* kp = k + static_cast<std::size_t>(dt) * cin * cout;
    for (int ci = 0; ci < cin; ++ci) {
      const double xv = xp[ci];
      const double* kc = kp + static_cast<std::size_t>(ci) * cout;
      for (int co = 0; co < cout; ++co) yp[co] += xv * kc[co];
    }
  }
}

}  // namespace

void conv1d_nodes_forward_serial(const double* x, const double* k, double* y,
                                 int t, int n, int cin, int kt, int cout) {
  for (int ti = 0; ti < t; ++ti)
    for (int ni = 0; ni < n; ++ni)
      conv1d_nodes_cell(x, k, y, t, n, cin, kt, cout, ti, ni);
}

void conv1d_nodes_forward(const double* x, const double* k, double* y, int t,
                          int n, int cin, int kt, int cout) {
  if (!g_parallel || t * n < 2) {
    conv1d_nodes_forward_serial(x, k, y, t, n, cin, kt, cout);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int ti = 0; ti < t; ++ti)
    for (int ni = 0; ni < n; ++ni)
      conv1d_nodes_cell(x, k, y, t, n, cin, kt, cout, ti, ni);
}

namespace {

inline void conv1d_nodes_dx_cell(const double* dy, const double* k, double* dx,
                                 int t, int n, int cin, int kt, int cout,
                                 int ti, int ni) {
  const int off = kt / 2;
  double* dxp = dx + (static_cast<std::size_t>(ti) * n + ni) * cin;
  for (int ci = 0; ci < cin; ++ci) dxp[ci] = 0.0;
  for (int dt = 0; dt < kt; ++dt) {
    const int dst = ti - dt + off;
    if (dst < 0 || dst >= t) continue;
    const double* dyp = dy + (static_cast<std::size_t>(dst) * n + ni) * cout;
    const double* kp = k + static_cast<std::size_t>(dt) * cin * cout;
    for (int ci = 0; ci < cin; ++ci) {
      const double* kc = kp + static_cast<std::size_t>(ci) * cout;
      double acc = 0.0;
      for (int co = 0; co < cout; ++co) acc += dyp[co] * kc[co];
      dxp[ci] += acc;
    }
  }
}

}  // namespace

void conv1d_nodes_backward_input(const double* dy, const double* k, double* dx,
                                 int t, int n, int cin, int kt, int cout) {
  if (!g_parallel || t * n < 2) {
    for (int ti = 0; ti < t; ++ti)
      for (int ni = 0; ni < n; ++ni)
        conv1d_nodes_dx_cell(dy, k, dx, t, n, cin, kt, cout, ti, ni);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int ti = 0; ti < t; ++ti)
    for (int ni = 0; ni < n; ++ni)
      conv1d_nodes_dx_cell(dy, k, dx, t, n, cin, kt, cout, ti, ni);
}

namespace {

inline void conv1d_nodes_dk_tap(const double* dy, const double* x, double* dk,
                                int t, int n, int cin, int kt, int cout,
                                int dt, int ci) {
  const int off = kt / 2;
  double* dkp = dk + (static_cast<std::size_t>(dt) * cin + ci) * cout;
  for (int co = 0; co < cout; ++co) dkp[co] = 0.0;
  for (int ti = 0; ti < t; ++ti) {
    const int src = ti + dt - off;
    if (src < 0 || src >= t) continue;
    for (int ni = 0; ni < n; ++ni) {
      const double xv = x[(static_cast<std::size_t>(src) * n + ni) * cin + ci];
      const double* dyp = dy + (static_cast<std::size_t>(ti) * n + ni) * cout;
      for (int co = 0; co < cout; ++co) dkp[co] += xv * dyp[co];
    }
  }
}

}  // namespace

void conv1d_nodes_backward_kernel(const double* dy, const double* x, double* dk,
                                  int t, int n, int cin, int kt, int cout) {
  if (!g_parallel || kt * cin < 2) {
    for (int dt = 0; dt < kt; ++dt)
      for (int ci = 0; ci < cin; ++ci)
        conv1d_nodes_dk_tap(dy, x, dk, t, n, cin, kt, cout, dt, ci);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int dt = 0; dt < kt; ++dt)
    for (int ci = 0; ci < cin; ++ci)
      conv1d_nodes_dk_tap(dy, x, dk, t, n, cin, kt, cout, dt, ci);
}

// ---- depthwise conv1d --------------------------------------------------------

void dwconv1d_forward(const double* x, const double* k, double* y, int t,
                      int c, int kt) {
  const int off = kt / 2;
  for (int ti = 0; ti < t; ++ti) {
    double* yp = y + static_cast<std::size_t>(ti) * c;
    for (int ci = 0; ci < c; ++ci) yp[ci] = 0.0;
    for (int dt = 0; dt < kt; ++dt) {
      const int src = ti + dt - off;
      if (src < 0 || src >= t) continue;
      const double* xp = x + static_cast<std::size_t>(src) * c;
      const double* kp = k + static_cast<std::size_t>(dt) * c;
      for (int ci = 0; ci < c; ++ci) yp[ci] += xp[ci] * kp[ci];
    }
  }
}

void dwconv1d_backward_input(const double* dy, const double* k, double* dx,
                             int t, int c, int kt) {
  const int off = kt / 2;
  for (int ti = 0; ti < t; ++ti) {
    double* dxp = dx + static_cast<std::size_t>(ti) * c;
    for (int ci = 0; ci < c; ++ci) dxp[ci] = 0.0;
    for (int dt = 0; dt < kt; ++dt) {
      const int dst = ti - dt + off;
      if (dst < 0 || dst >= t) continue;
      const double* dyp = dy + static_cast<std::size_t>(dst) * c;
      const double* kp = k + static_cast<std::size_t>(dt) * c;
      for (int ci = 0; ci < c; ++ci) dxp[ci] += dyp[ci] * kp[ci];
    }
  }
}

void dwconv1d_backward_kernel(const double* dy, const double* x, double* dk,
                              int t, int c, int kt) {
  const int off = kt / 2;
  for (int dt = 0; dt < kt; ++dt) {
    double* dkp = dk + static_cast<std::size_t>(dt) * c;
    for (int ci = 0; ci < c; ++ci) dkp[ci] = 0.0;
    for (int ti = 0; ti < t; ++ti) {
      const int src = ti + dt - off;
      if (src < 0 || src >= t) continue;
      const double* xp = x + static_cast<std::size_t>(src) * c;
      const double* dyp = dy + static_cast<std::size_t>(ti) * c;
      for (int ci = 0; ci < c; ++ci) dkp[ci] += xp[ci] * dyp[ci];
    }
  }
}

// ---- sparse graph conv -------------------------------------------------------

namespace {

inline void graph_conv_frame(const double* x, const SparseMatrix& a, double* y,
                             int c, int ti) {
  const double* xf = x + static_cast<std::size_t>(ti) * a.n * c;
  double* yf = y + static_cast<std::size_t>(ti) * a.n * c;
  for (int i = 0; i < a.n; ++i) {
    double* yrow = yf + static_cast<std::size_t>(i) * c;
    for (int ci = 0; ci < c; ++ci) yrow[ci] = 0.0;
    for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const double w = a.val[e];
      const double* xrow = xf + static_cast<std::size_t>(a.col[e]) * c;
      for (int ci = 0; ci < c; ++ci) yrow[ci] += w * xrow[ci];
    }
  }
}

}  // namespace

void graph_conv_forward_serial(const double* x, const SparseMatrix& a,
                               double* y, int t, int c) {
  for (int ti = 0; ti < t; ++ti) graph_conv_frame(x, a, y, c, ti);
}

void graph_conv_forward(const double* x, const SparseMatrix& a, double* y,
                        int t, int c) {
  if (!g_parallel || t < 2) {
    graph_conv_forward_serial(x, a, y, t, c);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int ti = 0; ti < t; ++ti) graph_conv_frame(x, a, y, c, ti);
}

void graph_conv_backward(const double* dy, const SparseMatrix& a, double* dx,
                         int t, int c) {
  // A is symmetric, so dX = A^T dY = A dY
  graph_conv_forward(dy, a, dx, t, c);
}

}  // namespace vsr::kernels

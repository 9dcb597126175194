#ifndef VSR_KERNELS_HPP
#define VSR_KERNELS_HPP

#include <cstdint>
#include <vector>

namespace vsr::kernels {

// The hot inner loops live here in two variants: a serial reference and an
// OpenMP version. The OpenMP loops split work over independent output (or
// gradient-target) elements only, with the same inner summation order as the
// serial reference, so both variants produce bit-identical doubles. Tests
// assert that equality; the bench tool compares their throughput.

// process-wide switch; defaults to true when compiled with OpenMP
void set_parallel(bool enabled);
bool parallel_enabled();
int max_threads();

// ---- matmul ----------------------------------------------------------------
// C[m,n] = op(A) * op(B), op controlled by transpose flags.
// A is [m,k] (or [k,m] when ta), B is [k,n] (or [n,k] when tb). C is
// accumulated from zero; caller owns allocation of m*n doubles.
void matmul(const double* a, const double* b, double* c, int m, int k, int n,
            bool ta, bool tb);
void matmul_serial(const double* a, const double* b, double* c, int m, int k,
                   int n, bool ta, bool tb);

// ---- conv3d ----------------------------------------------------------------
// Cross-correlation on [T,H,W,Cin] with kernel [kt,kh,kw,Cin,Cout].
struct Conv3dDims {
  int t, h, w, cin;            // input
  int kt, kh, kw, cout;        // kernel
  int st, sh, sw;              // stride
  int pt, ph, pw;              // leading pad per axis
  int to, ho, wo;              // output
};

void conv3d_forward(const double* x, const double* k, double* y,
                    const Conv3dDims& d);
void conv3d_forward_serial(const double* x, const double* k, double* y,
                           const Conv3dDims& d);
void conv3d_backward_input(const double* dy, const double* k, double* dx,
                           const Conv3dDims& d);
void conv3d_backward_kernel(const double* dy, const double* x, double* dk,
                            const Conv3dDims& d);

// ---- temporal conv over node sequences --------------------------------------
// x is [T,N,C], kernel [kt,Cin,Cout], odd kt, "same" padding, weights shared
// across the N nodes. y is [T,N,Cout].
void conv1d_nodes_forward(const double* x, const double* k, double* y, int t,
                          int n, int cin, int kt, int cout);
void conv1d_nodes_forward_serial(const double* x, const double* k, double* y,
                                 int t, int n, int cin, int kt, int cout);
void conv1d_nodes_backward_input(const double* dy, const double* k, double* dx,
                                 int t, int n, int cin, int kt, int cout);
void conv1d_nodes_backward_kernel(const double* dy, const double* x, double* dk,
                                  int t, int n, int cin, int kt, int cout);

// ---- depthwise temporal conv -------------------------------------------------
// x is [T,C], kernel [kt,C], odd kt, "same" padding.
void dwconv1d_forward(const double* x, const double* k, double* y, int t,
                      int c, int kt);
void dwconv1d_backward_input(const double* dy, const double* k, double* dx,
                             int t, int c, int kt);
void dwconv1d_backward_kernel(const double* dy, const double* x, double* dk,
                              int t, int c, int kt);

// ---- sparse graph convolution -----------------------------------------------
// CSR of a symmetric [N,N] matrix; y[t,i,:] = sum_j w_ij x[t,j,:].
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;   // n+1
  std::vector<int> col;       // nnz
  std::vector<double> val;    // nnz
};

void graph_conv_forward(const double* x, const SparseMatrix& a, double* y,
                        int t, int c);
void graph_conv_forward_serial(const double* x, const SparseMatrix& a,
                               double* y, int t, int c);
// gradient wrt x; valid because the adjacency is symmetric
void graph_conv_backward(const double* dy, const SparseMatrix& a, double* dx,
                         int t, int c);

}  // namespace vsr::kernels

#endif  // VSR_KERNELS_HPP

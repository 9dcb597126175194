// Serial-reference vs OpenMP kernel timing. The parallel variants must be
// bit-identical to the reference (asserted here on top of the unit tests),
// so the only question this tool answers is speedup.

#include <chrono>
#include <cstdio>
#include <vector>

#include "vsr/kernels.hpp"
#include "vsr/rng.hpp"

namespace k = vsr::kernels;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<double> random_vec(std::size_t n, vsr::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_s();
    fn();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

void report(const char* name, double flops, double serial_s, double parallel_s,
            bool identical) {
  std::printf("%-22s serial %8.2f ms (%6.2f GFLOP/s)  omp %8.2f ms (%6.2f "
              "GFLOP/s)  speedup %.2fx  bit-identical %s\n",
              name, serial_s * 1e3, flops / serial_s * 1e-9, parallel_s * 1e3,
              flops / parallel_s * 1e-9, serial_s / parallel_s,
              identical ? "yes" : "NO");
}

}  // namespace

int main() {
  vsr::Rng rng(7);
  std::printf("threads available: %d\n", k::max_threads());

  {
    const int m = 384, kk = 384, n = 384;
    auto a = random_vec(static_cast<std::size_t>(m) * kk, rng);
    auto b = random_vec(static_cast<std::size_t>(kk) * n, rng);
    std::vector<double> c_ref(static_cast<std::size_t>(m) * n);
    std::vector<double> c_par(c_ref.size());
    const double flops = 2.0 * m * kk * n;
    const double ts = time_best_of(5, [&] {
      k::matmul_serial(a.data(), b.data(), c_ref.data(), m, kk, n, false, false);
    });
    k::set_parallel(true);
    const double tp = time_best_of(5, [&] {
      k::matmul(a.data(), b.data(), c_par.data(), m, kk, n, false, false);
    });
    report("matmul 384^3", flops, ts, tp, c_ref == c_par);
  }

  {
    k::Conv3dDims d;
    d.t = 24;
    d.h = 32;
    d.w = 32;
    d.cin = 1;
    d.kt = 5;
    d.kh = 7;
    d.kw = 7;
    d.cout = 8;
    d.st = 1;
    d.sh = 2;
    d.sw = 2;
    d.pt = 2;
    d.ph = 0;
    d.pw = 0;
    d.to = 24;
    d.ho = (d.h - d.kh) / d.sh + 1;
    d.wo = (d.w - d.kw) / d.sw + 1;
    auto x = random_vec(static_cast<std::size_t>(d.t) * d.h * d.w * d.cin, rng);
    auto kern = random_vec(
        static_cast<std::size_t>(d.kt) * d.kh * d.kw * d.cin * d.cout, rng);
    const std::size_t ysz =
        static_cast<std::size_t>(d.to) * d.ho * d.wo * d.cout;
    std::vector<double> y_ref(ysz), y_par(ysz);
    const double flops = 2.0 * ysz * d.kt * d.kh * d.kw * d.cin;
    const double ts = time_best_of(5, [&] {
      k::conv3d_forward_serial(x.data(), kern.data(), y_ref.data(), d);
    });
    k::set_parallel(true);
    const double tp = time_best_of(5, [&] {
      k::conv3d_forward(x.data(), kern.data(), y_par.data(), d);
    });
    report("conv3d 5x7x7", flops, ts, tp, y_ref == y_par);
  }

  {
    const int t = 64, n = 117, cin = 32, kt = 5, cout = 32;
    auto x = random_vec(static_cast<std::size_t>(t) * n * cin, rng);
    auto kern = random_vec(static_cast<std::size_t>(kt) * cin * cout, rng);
    std::vector<double> y_ref(static_cast<std::size_t>(t) * n * cout);
    std::vector<double> y_par(y_ref.size());
    const double flops = 2.0 * y_ref.size() * kt * cin;
    const double ts = time_best_of(5, [&] {
      k::conv1d_nodes_forward_serial(x.data(), kern.data(), y_ref.data(), t, n,
                                     cin, kt, cout);
    });
    k::set_parallel(true);
    const double tp = time_best_of(5, [&] {
      k::conv1d_nodes_forward(x.data(), kern.data(), y_par.data(), t, n, cin,
                              kt, cout);
    });
    report("temporal conv1d", flops, ts, tp, y_ref == y_par);
  }

  return 0;
}

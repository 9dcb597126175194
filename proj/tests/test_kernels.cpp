#include <doctest.h>

#include <vector>

#include "vsr/kernels.hpp"
#include "vsr/rng.hpp"

namespace k = vsr::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, vsr::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("parallel matmul is bit-identical to the serial reference") {
  vsr::Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(20));
    const int kk = 1 + static_cast<int>(rng.below(20));
    const int n = 1 + static_cast<int>(rng.below(20));
    for (bool ta : {false, true})
      for (bool tb : {false, true}) {
        auto a = random_vec(static_cast<std::size_t>(m) * kk, rng);
        auto b = random_vec(static_cast<std::size_t>(kk) * n, rng);
        std::vector<double> c_ref(static_cast<std::size_t>(m) * n);
        std::vector<double> c_par(static_cast<std::size_t>(m) * n);
        k::matmul_serial(a.data(), b.data(), c_ref.data(), m, kk, n, ta, tb);
        k::set_parallel(true);
        k::matmul(a.data(), b.data(), c_par.data(), m, kk, n, ta, tb);
        CHECK(c_ref == c_par);
      }
  }
}

TEST_CASE("parallel conv3d is bit-identical to the serial reference") {
  vsr::Rng rng(2);
  k::Conv3dDims d;
  d.t = 6;
  d.h = 9;
  d.w = 9;
  d.cin = 2;
  d.kt = 3;
  d.kh = 3;
  d.kw = 3;
  d.cout = 4;
  d.st = 1;
  d.sh = 2;
  d.sw = 2;
  d.pt = 1;
  d.ph = 0;
  d.pw = 0;
  d.to = 6;
  d.ho = 4;
  d.wo = 4;
  auto x = random_vec(static_cast<std::size_t>(d.t) * d.h * d.w * d.cin, rng);
  auto kk =
      random_vec(static_cast<std::size_t>(d.kt) * d.kh * d.kw * d.cin * d.cout,
                 rng);
  const std::size_t ysz = static_cast<std::size_t>(d.to) * d.ho * d.wo * d.cout;
  std::vector<double> y_ref(ysz), y_par(ysz);
  k::conv3d_forward_serial(x.data(), kk.data(), y_ref.data(), d);
  k::set_parallel(true);
  k::conv3d_forward(x.data(), kk.data(), y_par.data(), d);
  CHECK(y_ref == y_par);
}

TEST_CASE("graph conv parallel equals serial") {
  vsr::Rng rng(3);
  k::SparseMatrix a;
  a.n = 5;
  // symmetric ring with self loops
  a.row_ptr = {0, 3, 6, 9, 12, 15};
  a.col = {0, 1, 4, 0, 1, 2, 1, 2, 3, 2, 3, 4, 0, 3, 4};
  a.val.assign(15, 0.5);
  const int t = 7, c = 3;
  auto x = random_vec(static_cast<std::size_t>(t) * a.n * c, rng);
  std::vector<double> y_ref(x.size()), y_par(x.size());
  k::graph_conv_forward_serial(x.data(), a, y_ref.data(), t, c);
  k::set_parallel(true);
  k::graph_conv_forward(x.data(), a, y_par.data(), t, c);
  CHECK(y_ref == y_par);
}

TEST_CASE("conv1d over nodes parallel equals serial") {
  vsr::Rng rng(4);
  const int t = 11, n = 6, cin = 3, kt = 3, cout = 5;
  auto x = random_vec(static_cast<std::size_t>(t) * n * cin, rng);
  auto kk = random_vec(static_cast<std::size_t>(kt) * cin * cout, rng);
  std::vector<double> y_ref(static_cast<std::size_t>(t) * n * cout);
  std::vector<double> y_par(y_ref.size());
  k::conv1d_nodes_forward_serial(x.data(), kk.data(), y_ref.data(), t, n, cin,
                                 kt, cout);
  k::set_parallel(true);
  k::conv1d_nodes_forward(x.data(), kk.data(), y_par.data(), t, n, cin, kt,
                          cout);
  CHECK(y_ref == y_par);
}

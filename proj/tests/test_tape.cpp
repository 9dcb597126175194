#include <doctest.h>

#include <cmath>
#include <vector>

#include "vsr/tape.hpp"

using vsr::Tape;
using vsr::Tensor;
using vsr::Var;

namespace {

Tensor random_tensor(std::vector<int> shape, vsr::Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("matmul identity and hand example") {
  vsr::Rng rng(7);
  Tensor a = random_tensor({3, 3}, rng);
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at({i, i}) = 1.0;
  Tape tape;
  Var av = tape.leaf(&a);
  Var iv = tape.constant(eye);
  Var y = tape.matmul(av, iv);
  CHECK(tape.val(y).data == a.data);

  Tensor b({2, 2}, {1, 2, 3, 4});
  Tensor ones({2, 1}, {1, 1});
  Tape t2;
  Var yv = t2.matmul(t2.constant(b), t2.constant(ones));
  CHECK(t2.val(yv).data == std::vector<double>{3, 7});
}

TEST_CASE("matmul gradient matches finite differences in all transpose modes") {
  for (bool ta : {false, true})
    for (bool tb : {false, true}) {
      vsr::Rng rng(11 + 2 * ta + tb);
      Tensor a = ta ? random_tensor({4, 3}, rng) : random_tensor({3, 4}, rng);
      Tensor b = tb ? random_tensor({5, 4}, rng) : random_tensor({4, 5}, rng);
      const double err = vsr::grad_check(
          [&](Tape& t) {
            return t.sum_all(t.matmul(t.leaf(&a), t.leaf(&b), ta, tb));
          },
          {&a, &b});
      CHECK(err <= 1e-6);
    }
}

TEST_CASE("mish values") {
  Tape tape;
  Tensor x({3}, {0.0, 1.0, -20.0});
  Var y = tape.mish(tape.constant(x));
  const auto& out = tape.val(y).data;
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(0.86509838826731035).epsilon(1e-12));
  CHECK(out[2] < 0.0);
  CHECK(out[2] > -1e-7);
}

TEST_CASE("layer_norm of constant row is zero pre-affine") {
  Tape tape;
  Tensor x({1, 5});
  for (auto& v : x.data) v = 3.25;
  Tensor gamma = Tensor::full({5}, 1.0);
  Tensor beta({5});
  Var y = tape.layer_norm(tape.constant(x), tape.constant(gamma),
                          tape.constant(beta));
  for (double v : tape.val(y).data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("log softmax of uniform logits is ln(1/n)") {
  Tape tape;
  Tensor x({1, 8});
  for (auto& v : x.data) v = 0.7;
  Var y = tape.log_softmax_rows(tape.constant(x));
  for (double v : tape.val(y).data)
    CHECK(v == doctest::Approx(std::log(1.0 / 8)).epsilon(1e-12));
}

TEST_CASE("elementwise and reduction ops pass finite-difference checks") {
  for (int seed = 0; seed < 20; ++seed) {
    vsr::Rng rng(100 + seed);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor g = random_tensor({4}, rng, 0.5, 1.5);
    Tensor b = random_tensor({4}, rng);

    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.mish(t.leaf(&x)));
          },
          {&x}) <= 1e-6);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.mean_all(t.layer_norm(t.leaf(&x), t.leaf(&g), t.leaf(&b)));
          },
          {&x, &g, &b}) <= 1e-6);
    Tensor probe = random_tensor({3, 4}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(
                t.mul(t.log_softmax_rows(t.leaf(&x)), t.constant(probe)));
          },
          {&x}) <= 1e-6);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(
                t.mul(t.softmax_rows(t.leaf(&x)), t.constant(probe)));
          },
          {&x}) <= 1e-6);

    // relu kinks excluded: keep inputs away from zero
    Tensor xr = random_tensor({3, 4}, rng);
    for (auto& v : xr.data) v = (v < 0 ? v - 0.2 : v + 0.2);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.relu(t.leaf(&xr)));
          },
          {&xr}) <= 1e-6);

    Tensor a2 = random_tensor({2, 3}, rng);
    Tensor b2 = random_tensor({2, 3}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.logaddexp(t.leaf(&a2), t.leaf(&b2)));
          },
          {&a2, &b2}) <= 1e-6);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.mul(t.leaf(&a2), t.leaf(&b2)));
          },
          {&a2, &b2}) <= 1e-6);
  }
}

TEST_CASE("structural ops pass finite-difference checks") {
  for (int seed = 0; seed < 20; ++seed) {
    vsr::Rng rng(200 + seed);
    Tensor x = random_tensor({4, 6}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.slice_cols(t.leaf(&x), 1, 4));
          },
          {&x}) <= 1e-6);
    CHECK(vsr::grad_check([&](Tape& t) {
            Var l = t.leaf(&x);
            return t.sum_all(t.concat_cols({t.slice_cols(l, 0, 2),
                                            t.slice_cols(l, 2, 6)}));
          },
          {&x}) <= 1e-6);
    std::vector<int> gather_idx = {5, 0, 0, 3};
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.gather_cols(t.leaf(&x), gather_idx));
          },
          {&x}) <= 1e-6);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.time_interp(t.leaf(&x), 7));
          },
          {&x}) <= 1e-6);
    Tensor table = random_tensor({5, 3}, rng);
    std::vector<int> ids = {0, 2, 2, 4};
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(
                t.mul(t.embedding(t.leaf(&table), ids),
                      t.constant(Tensor::full({4, 3}, 0.5))));
          },
          {&table}) <= 1e-6);

    Tensor v3 = random_tensor({3, 2, 4}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.mean_nodes(t.leaf(&v3)));
          },
          {&v3}) <= 1e-6);
    Tensor v4 = random_tensor({2, 3, 3, 2}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.mean_hw(t.leaf(&v4)));
          },
          {&v4}) <= 1e-6);
  }
}

TEST_CASE("conv ops pass finite-difference checks") {
  for (int seed = 0; seed < 5; ++seed) {
    vsr::Rng rng(300 + seed);
    Tensor x = random_tensor({5, 6, 6, 2}, rng);
    Tensor k = random_tensor({3, 3, 3, 2, 2}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(
                t.mish(t.conv3d(t.leaf(&x), t.leaf(&k), {1, 2, 2},
                                vsr::Conv3dPad::kSameTemporal)));
          },
          {&x, &k}) <= 1e-6);

    Tensor xs = random_tensor({6, 4, 3}, rng);
    Tensor ks = random_tensor({3, 3, 2}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.conv1d_nodes(t.leaf(&xs), t.leaf(&ks)));
          },
          {&xs, &ks}) <= 1e-6);

    Tensor xd = random_tensor({6, 4}, rng);
    Tensor kd = random_tensor({3, 4}, rng);
    CHECK(vsr::grad_check([&](Tape& t) {
            return t.sum_all(t.dwconv1d(t.leaf(&xd), t.leaf(&kd)));
          },
          {&xd, &kd}) <= 1e-6);
  }
}

TEST_CASE("conv3d identity and analytic constant cases") {
  // 1x1x1 kernel of value 1 is the identity
  vsr::Rng rng(17);
  Tensor x = random_tensor({3, 4, 4, 1}, rng);
  Tensor k({1, 1, 1, 1, 1}, {1.0});
  Tape tape;
  Var y = tape.conv3d(tape.constant(x), tape.constant(k), {1, 1, 1},
                      vsr::Conv3dPad::kValid);
  CHECK(tape.val(y).data == x.data);

  // all-ones 5x7x7 kernel over constant input, valid padding
  const double c = 0.37;
  Tensor xc = Tensor::full({6, 8, 8, 2}, c);
  Tensor kc = Tensor::full({5, 7, 7, 2, 1}, 1.0);
  Tape t2;
  Var y2 = t2.conv3d(t2.constant(xc), t2.constant(kc), {1, 1, 1},
                     vsr::Conv3dPad::kValid);
  const Tensor& out = t2.val(y2);
  CHECK(out.shape == std::vector<int>{2, 2, 2, 1});
  for (double v : out.data)
    CHECK(v == doctest::Approx(c * 5 * 7 * 7 * 2).epsilon(1e-12));

  // stride must be positive
  CHECK_THROWS_AS(
      [&] {
        Tape t3;
        t3.conv3d(t3.constant(xc), t3.constant(kc), {0, 1, 1},
                  vsr::Conv3dPad::kValid);
      }(),
      vsr::InvalidStride);
  // kernel must fit under valid padding
  CHECK_THROWS_AS(
      [&] {
        Tape t4;
        Tensor small = Tensor::full({2, 3, 3, 2}, 1.0);
        t4.conv3d(t4.constant(small), t4.constant(kc), {1, 1, 1},
                  vsr::Conv3dPad::kValid);
      }(),
      vsr::ShapeMismatch);
}

TEST_CASE("backward is linear and accumulates across calls") {
  vsr::Rng rng(23);
  Tensor x = random_tensor({3, 3}, rng);
  x.requires_grad = true;

  Tape tape;
  Var l = tape.leaf(&x);
  Var f = tape.sum_all(tape.mish(l));
  Var g = tape.mean_all(tape.mul(l, l));
  Var fg = tape.add(f, g);

  x.grad.reset();
  tape.backward(fg);
  const auto combined = *x.grad;

  x.grad.reset();
  tape.backward(f);
  const auto gf = *x.grad;
  x.grad.reset();
  tape.backward(g);
  const auto gg = *x.grad;

  for (std::size_t i = 0; i < combined.size(); ++i)
    CHECK(combined[i] == doctest::Approx(gf[i] + gg[i]).epsilon(1e-12));

  // repeated backward accumulates until zeroed
  x.grad.reset();
  tape.backward(f);
  tape.backward(f);
  for (std::size_t i = 0; i < gf.size(); ++i)
    CHECK((*x.grad)[i] == doctest::Approx(2.0 * gf[i]).epsilon(1e-12));
}

TEST_CASE("backward error contracts") {
  Tensor x({2, 2}, {1, 2, 3, 4});
  x.requires_grad = true;
  Tape tape;
  Var l = tape.leaf(&x);
  CHECK_THROWS_AS(tape.backward(l), vsr::NotScalar);

  Tape other;
  Var s = other.sum_all(other.leaf(&x));
  CHECK_THROWS_AS(tape.backward(s), vsr::DetachedGraph);

  // loss with no differentiable dependency
  Tensor c({1}, {2.0});
  Tape t3;
  Var cv = t3.constant(c);
  CHECK_THROWS_AS(t3.backward(cv), vsr::DetachedGraph);
}

TEST_CASE("forward determinism") {
  vsr::Rng rng(31);
  Tensor x = random_tensor({4, 5}, rng);
  Tensor w = random_tensor({5, 5}, rng);
  auto run = [&] {
    Tape t;
    Var y = t.log_softmax_rows(
        t.mish(t.matmul(t.constant(x), t.constant(w))));
    return t.val(y).data;
  };
  CHECK(run() == run());
}

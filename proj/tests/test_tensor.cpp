#include <doctest.h>

#include "vsr/tensor.hpp"

using vsr::Tensor;

TEST_CASE("shape and data agree") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.ndim() == 2);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), vsr::ShapeMismatch);
  CHECK_THROWS_AS(Tensor({0, 2}), vsr::ShapeMismatch);
}

TEST_CASE("row-major indexing") {
  Tensor t({2, 3});
  t.at({1, 2}) = 7.0;
  CHECK(t.data[5] == 7.0);
  t.at({0, 1}) = 3.0;
  CHECK(t.data[1] == 3.0);
}

TEST_CASE("grad accumulator matches shape and accumulates") {
  Tensor t({2, 2});
  t.ensure_grad();
  CHECK(t.grad->size() == t.data.size());
  t.accumulate_grad({1, 2, 3, 4});
  t.accumulate_grad({1, 1, 1, 1});
  CHECK((*t.grad)[3] == 5.0);
  t.zero_grad();
  CHECK((*t.grad)[3] == 0.0);
}

TEST_CASE("seeded gaussian fill is reproducible") {
  vsr::Rng a(42), b(42);
  Tensor x({3, 3}), y({3, 3});
  vsr::fill_gaussian(x, a, 0.5);
  vsr::fill_gaussian(y, b, 0.5);
  CHECK(x.data == y.data);
  CHECK(x.all_finite());
}

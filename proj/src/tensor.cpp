#include "vsr/tensor.hpp"

#include <cmath>
#include <sstream>

namespace vsr {

int shape_product(const std::vector<int>& s) {
  int n = 1;
  for (int d : s) {
    if (d <= 0) throw ShapeMismatch("non-positive extent in shape");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<std::size_t>(shape_product(shape)), 0.0);
}

Tensor::Tensor(std::vector<int> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (shape_product(shape) != static_cast<int>(data.size()))
    throw ShapeMismatch("data length does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int> s, double v) {
  Tensor t(std::move(s));
  for (auto& x : t.data) x = v;
  return t;
}

double& Tensor::at(std::initializer_list<int> idx) {
  std::size_t off = 0;
  auto it = idx.begin();
  for (std::size_t i = 0; i < shape.size(); ++i, ++it)
    off = off * static_cast<std::size_t>(shape[i]) + static_cast<std::size_t>(*it);
  return data[off];
}

double Tensor::at(std::initializer_list<int> idx) const {
  return const_cast<Tensor*>(this)->at(idx);
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::ensure_grad() {
  if (!grad) grad.emplace(data.size(), 0.0);
}

void Tensor::zero_grad() {
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
}

void Tensor::accumulate_grad(const std::vector<double>& g) {
  ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) (*grad)[i] += g[i];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_shape(bool cond, const std::string& what) {
  if (!cond) throw ShapeMismatch(what);
}

void fill_gaussian(Tensor& t, Rng& rng, double sigma) {
  for (auto& v : t.data) v = rng.gauss(0.0, sigma);
}

}  // namespace vsr

#ifndef VSR_TENSOR_HPP
#define VSR_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "vsr/errors.hpp"
#include "vsr/rng.hpp"

namespace vsr {

// Dense row-major tensor of doubles. Carries an optional gradient accumulator
// of identical shape; the tape fills it for requires_grad leaves.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::optional<std::vector<double>> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<double> d);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int size() const { return static_cast<int>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  bool is_scalar() const { return data.size() == 1; }

  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;

  // gradient accumulator management
  void ensure_grad();
  void zero_grad();
  void accumulate_grad(const std::vector<double>& g);

  std::string shape_str() const;
};

int shape_product(const std::vector<int>& s);

// throws ShapeMismatch with a formatted message when cond is false
void check_shape(bool cond, const std::string& what);

// fills with iid N(0, sigma^2)
void fill_gaussian(Tensor& t, Rng& rng, double sigma);

}  // namespace vsr

#endif  // VSR_TENSOR_HPP

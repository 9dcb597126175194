#ifndef VSR_PARAMS_HPP
#define VSR_PARAMS_HPP

#include <string>
#include <utility>
#include <vector>

#include "vsr/tensor.hpp"

namespace vsr {

// Stable, ordered list of named parameters. Registration order defines the
// optimizer state layout and the checkpoint blob order, so it must be
// deterministic for a given config.
class ParamRegistry {
 public:
  void add(const std::string& name, Tensor* t) {
    items_.emplace_back(name, t);
    t->requires_grad = true;
  }

  const std::vector<std::pair<std::string, Tensor*>>& items() const {
    return items_;
  }

  Tensor* find(const std::string& name) const {
    for (const auto& [n, t] : items_)
      if (n == name) return t;
    return nullptr;
  }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t->data.size();
    return n;
  }

  void zero_grads() const {
    for (const auto& [name, t] : items_) {
      t->ensure_grad();
      t->zero_grad();
    }
  }

 private:
  std::vector<std::pair<std::string, Tensor*>> items_;
};

}  // namespace vsr

#endif  // VSR_PARAMS_HPP

#ifndef VSR_OPTIM_HPP
#define VSR_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "vsr/params.hpp"

namespace vsr {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled weight decay (param -= lr*wd*param) followed by the Adam moment
// update with bias correction. Moment buffers follow the registry order.
class AdamW {
 public:
  AdamW(const ParamRegistry& registry, const AdamWConfig& cfg);

  // consumes the gradients currently held by the registered tensors
  void step(double lr);

  std::int64_t step_count() const { return t_; }
  const std::vector<std::vector<double>>& m() const { return m_; }
  const std::vector<std::vector<double>>& v() const { return v_; }
  // checkpoint restore; shapes must match the registry
  void restore(std::int64_t t, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  const ParamRegistry& registry_;
  AdamWConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Linear ramp 0 -> lr_init over the warmup, then cosine decay to lr_min.
// Throws InvalidSchedule when warmup_steps >= total_steps.
double cosine_warmup_lr(std::int64_t step, std::int64_t total_steps,
                        std::int64_t warmup_steps, double lr_init,
                        double lr_min);

}  // namespace vsr

#endif  // VSR_OPTIM_HPP

#include "vsr/optim.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

AdamW::AdamW(const ParamRegistry& registry, const AdamWConfig& cfg)
    : registry_(registry), cfg_(cfg) {
  for (const auto& [name, t] : registry.items()) {
    m_.emplace_back(t->data.size(), 0.0);
    v_.emplace_back(t->data.size(), 0.0);
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const auto& items = registry_.items();
  for (std::size_t p = 0; p < items.size(); ++p) {
    Tensor* param = items[p].second;
    if (!param->grad || param->grad->size() != param->data.size())
      throw ShapeMismatch("adamw: missing or mis-sized gradient for " +
                          items[p].first);
    auto& m = m_[p];
    auto& v = v_[p];
    const auto& g = *param->grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      param->data[i] -= lr * cfg_.weight_decay * param->data[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      param->data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void AdamW::restore(std::int64_t t, std::vector<std::vector<double>> m,
                    std::vector<std::vector<double>> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw ShapeMismatch("adamw: state layout mismatch on restore");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size())
      throw ShapeMismatch("adamw: state shape mismatch on restore");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

double cosine_warmup_lr(std::int64_t step, std::int64_t total_steps,
                        std::int64_t warmup_steps, double lr_init,
                        double lr_min) {
  if (warmup_steps >= total_steps)
    throw InvalidSchedule("schedule: warmup must be shorter than the run");
  if (total_steps < 1 || lr_init <= 0.0)
    throw InvalidSchedule("schedule: bad total step count or lr");
  if (step < 0) step = 0;
  if (step > total_steps) step = total_steps;
  if (warmup_steps > 0 && step <= warmup_steps)
    return lr_init * static_cast<double>(step) /
           static_cast<double>(warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return lr_min + (lr_init - lr_min) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

}  // namespace vsr

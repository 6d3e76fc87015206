#include "rainfree/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace rainfree {

Adam::Adam(Module& net, double beta1, double beta2, double eps)
    : net_(&net), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  for (const auto& s : net.slots()) {
    state_.m.emplace_back(s.param.var.shape());
    state_.v.emplace_back(s.param.var.shape());
  }
}

void Adam::step(double lr) {
  ++state_.t;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(state_.t));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(state_.t));
  auto& slots = net_->slots();
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto& var = slots[k].param.var;
    const Tensor& g = var.grad();
    if (g.empty()) continue;
    Tensor& p = var.mutable_value();
    Tensor& m = state_.m[k];
    Tensor& v = state_.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * gi);
      v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * gi * gi);
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p[i] = static_cast<float>(p[i] - lr * mh / (std::sqrt(vh) + eps_));
    }
  }
}

void Adam::set_state(AdamState s) {
  const auto& slots = net_->slots();
  if (s.m.size() != slots.size() || s.v.size() != slots.size()) {
    throw std::invalid_argument("Adam state does not match module parameter count");
  }
  for (std::size_t k = 0; k < slots.size(); ++k) {
    require_same_shape(s.m[k], slots[k].param.var.value(), "Adam first moment");
    require_same_shape(s.v[k], slots[k].param.var.value(), "Adam second moment");
  }
  state_ = std::move(s);
}

}  // namespace rainfree

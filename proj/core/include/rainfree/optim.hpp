#pragma once

#include <cstdint>
#include <vector>

#include "rainfree/networks.hpp"

namespace rainfree {

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;
};

// Adam over every slot of one module, in slot order. Slots without a gradient are skipped.
class Adam {
 public:
  Adam(Module& net, double beta1, double beta2, double eps = 1e-8);

  void step(double lr);
  void zero_grad() { net_->zero_grad(); }

  [[nodiscard]] const AdamState& state() const { return state_; }
  void set_state(AdamState s);

 private:
  Module* net_;
  double beta1_;
  double beta2_;
  double eps_;
  AdamState state_;
};

}  // namespace rainfree

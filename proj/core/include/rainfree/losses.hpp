#pragma once

#include <string>

#include "rainfree/image.hpp"

namespace rainfree {

struct LossWeights {
  double w1 = 1.0;  // rain guidance (generator side)
  double w2 = 5.0;  // background guidance
  double w3 = 1.0;  // luminance-adjusting adversarial (generator side)
  double w4 = 0.5;  // cycle consistency

  void validate() const;
};

// Generator-side components of the total objective.
struct LossParts {
  double guid_r = 0.0;
  double guid_b = 0.0;
  double lum_adv_g = 0.0;
  double cyc = 0.0;
};

struct LossBundle {
  double guid_r = 0.0;
  double guid_b = 0.0;
  double lum_adv_g = 0.0;
  double cyc = 0.0;
  double total_g = 0.0;
  double d_c = 0.0;
  double d_s = 0.0;

  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] std::string str() const;
};

// mean |r_prime - r|.
double cycle_loss(const ImageTensor& rainy, const ImageTensor& reconstructed);

// w1 guid_r + w2 guid_b + w3 lum_adv_g + w4 cyc. Throws std::domain_error naming the first
// non-finite component.
double total_generator_loss(const LossParts& parts, const LossWeights& weights);

}  // namespace rainfree

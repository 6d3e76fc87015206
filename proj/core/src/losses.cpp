#include "rainfree/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rainfree {

void LossWeights::validate() const {
  for (double w : {w1, w2, w3, w4}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("loss weights must be finite and non-negative");
    }
  }
}

bool LossBundle::all_finite() const {
  for (double v : {guid_r, guid_b, lum_adv_g, cyc, total_g, d_c, d_s}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string LossBundle::str() const {
  std::ostringstream os;
  os << "guid_r=" << guid_r << " guid_b=" << guid_b << " lum_adv_g=" << lum_adv_g
     << " cyc=" << cyc << " total_g=" << total_g << " d_c=" << d_c << " d_s=" << d_s;
  return os.str();
}

double cycle_loss(const ImageTensor& rainy, const ImageTensor& reconstructed) {
  require_same_shape(rainy, reconstructed, "cycle_loss");
  return mean_abs_diff(reconstructed, rainy);
}

double total_generator_loss(const LossParts& parts, const LossWeights& weights) {
  const std::pair<const char*, double> named[] = {{"guid_r", parts.guid_r},
                                                  {"guid_b", parts.guid_b},
                                                  {"lum_adv_g", parts.lum_adv_g},
                                                  {"cyc", parts.cyc}};
  for (const auto& [name, v] : named) {
    if (!std::isfinite(v)) {
      throw std::domain_error(std::string("total_generator_loss: non-finite component ") + name);
    }
  }
  return weights.w1 * parts.guid_r + weights.w2 * parts.guid_b + weights.w3 * parts.lum_adv_g +
         weights.w4 * parts.cyc;
}

}  // namespace rainfree

#include "rainfree/luminance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rainfree/adversarial.hpp"

namespace rainfree {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("luminance gamma must lie in (0, 1), got " +
                                std::to_string(gamma));
  }
}

}  // namespace

ImageTensor enhance_luminance(const ImageTensor& clean, double gamma) {
  require_gamma(gamma);
  Tensor out(clean.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(static_cast<double>(clean[i]), 0.0, 1.0);
    out[i] = static_cast<float>(std::pow(v, gamma));
  }
  return out;
}

double lum_adv_discriminator_loss(const Tensor& clean_logits, const Tensor& enhanced_logits,
                                  const Tensor& derained_logits) {
  adversarial::require_finite_logits(clean_logits, "clean discriminator (clean)");
  adversarial::require_finite_logits(enhanced_logits, "clean discriminator (enhanced)");
  adversarial::require_finite_logits(derained_logits, "clean discriminator (derained)");
  require_same_shape(clean_logits, enhanced_logits, "lum_adv_discriminator_loss");
  require_same_shape(clean_logits, derained_logits, "lum_adv_discriminator_loss");
  return adversarial::real_term(clean_logits) + adversarial::fake_term(enhanced_logits) +
         adversarial::fake_term(derained_logits);
}

LogitTripleGrad lum_adv_discriminator_loss_grad(const Tensor& clean_logits,
                                                const Tensor& enhanced_logits,
                                                const Tensor& derained_logits) {
  adversarial::require_finite_logits(clean_logits, "clean discriminator (clean)");
  adversarial::require_finite_logits(enhanced_logits, "clean discriminator (enhanced)");
  adversarial::require_finite_logits(derained_logits, "clean discriminator (derained)");
  require_same_shape(clean_logits, enhanced_logits, "lum_adv_discriminator_loss_grad");
  require_same_shape(clean_logits, derained_logits, "lum_adv_discriminator_loss_grad");
  return {adversarial::real_term_grad(clean_logits), adversarial::fake_term_grad(enhanced_logits),
          adversarial::fake_term_grad(derained_logits)};
}

double plain_adv_discriminator_loss(const Tensor& clean_logits, const Tensor& derained_logits) {
  adversarial::require_finite_logits(clean_logits, "clean discriminator (clean)");
  adversarial::require_finite_logits(derained_logits, "clean discriminator (derained)");
  require_same_shape(clean_logits, derained_logits, "plain_adv_discriminator_loss");
  return adversarial::real_term(clean_logits) + adversarial::fake_term(derained_logits);
}

double lum_adv_generator_loss(const Tensor& derained_logits) {
  adversarial::require_finite_logits(derained_logits, "clean generator");
  return adversarial::real_term(derained_logits);
}

Tensor lum_adv_generator_loss_grad(const Tensor& derained_logits) {
  adversarial::require_finite_logits(derained_logits, "clean generator");
  return adversarial::real_term_grad(derained_logits);
}

NegativeSampleSet::NegativeSampleSet(double gamma, CachePolicy policy)
    : gamma_(gamma), policy_(policy) {
  require_gamma(gamma);
}

ImageTensor NegativeSampleSet::negative(std::size_t clean_index, const ImageTensor& clean) const {
  if (policy_ == CachePolicy::kOnTheFly) return enhance_luminance(clean, gamma_);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(clean_index); it != cache_.end()) return it->second;
  }
  ImageTensor e = enhance_luminance(clean, gamma_);
  std::lock_guard lock(mu_);
  return cache_.try_emplace(clean_index, std::move(e)).first->second;
}

}  // namespace rainfree

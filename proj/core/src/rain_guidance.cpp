#include "rainfree/rain_guidance.hpp"

#include <algorithm>

#include "rainfree/adversarial.hpp"

namespace rainfree {

StreakField extract_streaks(const ImageTensor& rainy, const ImageTensor& derained) {
  require_same_shape(rainy, derained, "extract_streaks");
  Tensor s(rainy.shape());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = rainy[i] - derained[i];
  return s;
}

ImageTensor compose_fake_rainy(const StreakField& streaks, const ImageTensor& clean) {
  require_same_shape(streaks, clean, "compose_fake_rainy");
  Tensor out(clean.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(streaks[i] + clean[i], 0.0F, 1.0F);
  }
  return out;
}

double rain_guidance_discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits) {
  adversarial::require_finite_logits(real_logits, "rain discriminator (real)");
  adversarial::require_finite_logits(fake_logits, "rain discriminator (fake)");
  require_same_shape(real_logits, fake_logits, "rain_guidance_discriminator_loss");
  return adversarial::real_term(real_logits) + adversarial::fake_term(fake_logits);
}

LogitPairGrad rain_guidance_discriminator_loss_grad(const Tensor& real_logits,
                                                    const Tensor& fake_logits) {
  adversarial::require_finite_logits(real_logits, "rain discriminator (real)");
  adversarial::require_finite_logits(fake_logits, "rain discriminator (fake)");
  require_same_shape(real_logits, fake_logits, "rain_guidance_discriminator_loss_grad");
  return {adversarial::real_term_grad(real_logits), adversarial::fake_term_grad(fake_logits)};
}

double rain_guidance_generator_loss(const Tensor& fake_logits) {
  adversarial::require_finite_logits(fake_logits, "rain generator");
  return adversarial::real_term(fake_logits);
}

Tensor rain_guidance_generator_loss_grad(const Tensor& fake_logits) {
  adversarial::require_finite_logits(fake_logits, "rain generator");
  return adversarial::real_term_grad(fake_logits);
}

}  // namespace rainfree

#pragma once

#include "rainfree/image.hpp"

namespace rainfree {

// Rainy minus derained, unclamped; values nominally in [-1, 1].
using StreakField = Tensor;

StreakField extract_streaks(const ImageTensor& rainy, const ImageTensor& derained);

// clamp01(streaks + clean), where `clean` is an unpaired sample from the clean domain.
ImageTensor compose_fake_rainy(const StreakField& streaks, const ImageTensor& clean);

struct LogitPairGrad {
  Tensor d_real;
  Tensor d_fake;
};

// Rain discriminator objective: mean over patches of
// -[log sigma(real) + log(1 - sigma(fake))], with real rainy images as positives.
double rain_guidance_discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits);
LogitPairGrad rain_guidance_discriminator_loss_grad(const Tensor& real_logits,
                                                    const Tensor& fake_logits);

// Non-saturating generator side: mean of -log sigma(fake).
double rain_guidance_generator_loss(const Tensor& fake_logits);
Tensor rain_guidance_generator_loss_grad(const Tensor& fake_logits);

}  // namespace rainfree

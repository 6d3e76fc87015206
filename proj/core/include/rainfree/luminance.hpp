#pragma once

#include <cstddef>
#include <map>
#include <mutex>

#include "rainfree/image.hpp"

namespace rainfree {

inline constexpr double kDefaultLumGamma = 0.6;

// Per-channel power law v -> v^gamma with gamma in (0, 1); strictly brightens (0, 1).
ImageTensor enhance_luminance(const ImageTensor& clean, double gamma = kDefaultLumGamma);

struct LogitTripleGrad {
  Tensor d_clean;
  Tensor d_enhanced;
  Tensor d_derained;
};

// Clean discriminator objective with luminance-enhanced negatives:
// mean of -[log sigma(clean) + log(1 - sigma(enhanced)) + log(1 - sigma(derained))].
double lum_adv_discriminator_loss(const Tensor& clean_logits, const Tensor& enhanced_logits,
                                  const Tensor& derained_logits);
LogitTripleGrad lum_adv_discriminator_loss_grad(const Tensor& clean_logits,
                                                const Tensor& enhanced_logits,
                                                const Tensor& derained_logits);

// Clean discriminator objective without the enhanced negatives.
double plain_adv_discriminator_loss(const Tensor& clean_logits, const Tensor& derained_logits);

// Non-saturating generator side: mean of -log sigma(derained).
double lum_adv_generator_loss(const Tensor& derained_logits);
Tensor lum_adv_generator_loss_grad(const Tensor& derained_logits);

enum class CachePolicy { kOnTheFly, kPrecomputed };

// The negative set E: one enhanced image per clean sample, keyed by clean index.
// Thread safe; the precomputed policy memoizes each enhanced image on first use.
class NegativeSampleSet {
 public:
  explicit NegativeSampleSet(double gamma = kDefaultLumGamma,
                             CachePolicy policy = CachePolicy::kOnTheFly);

  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] CachePolicy policy() const { return policy_; }

  ImageTensor negative(std::size_t clean_index, const ImageTensor& clean) const;

 private:
  double gamma_;
  CachePolicy policy_;
  mutable std::mutex mu_;
  mutable std::map<std::size_t, ImageTensor> cache_;
};

}  // namespace rainfree

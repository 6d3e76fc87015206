#pragma once

#include <string>
#include <vector>

#include "rainfree/image.hpp"

namespace rainfree {

struct BlurScale {
  double sigma = 0.0;
  double lambda = 0.0;
};

// Ordered (sigma, lambda) ladder for the background guidance loss.
class GaussianScaleConfig {
 public:
  // [(3, 0.01), (5, 0.1), (9, 1.0)]
  GaussianScaleConfig();
  explicit GaussianScaleConfig(std::vector<BlurScale> scales);

  [[nodiscard]] const std::vector<BlurScale>& scales() const { return scales_; }

  // "3:0.01,5:0.1,9:1"
  static GaussianScaleConfig parse(const std::string& text);
  [[nodiscard]] std::string str() const;

 private:
  std::vector<BlurScale> scales_;
};

struct GradientField {
  Tensor gx;  // derivative along the width axis
  Tensor gy;  // derivative along the height axis
};

// Length 2*ceil(3*sigma)+1, symmetric, sums to one.
std::vector<double> gaussian_kernel_1d(double sigma);

// Separable per-channel blur, horizontal pass then vertical, reflect padding.
Tensor gaussian_blur(const Tensor& x, double sigma);
// Transpose of the linear map gaussian_blur(., sigma).
Tensor gaussian_blur_adjoint(const Tensor& g, double sigma);

// Central differences (x[i+1] - x[i-1]) / 2 per axis with replicate boundary.
GradientField spatial_gradient(const Tensor& x);
// Transpose of spatial_gradient: returns sum of D_x^T gx + D_y^T gy.
Tensor spatial_gradient_adjoint(const GradientField& g);

// Unweighted mean |grad B_sigma(a) - grad B_sigma(b)| over both axes, all elements.
double blur_gradient_error(const Tensor& a, const Tensor& b, double sigma);

double background_guidance_loss(const ImageTensor& rainy, const ImageTensor& derained,
                                const GaussianScaleConfig& cfg = {});
// d loss / d derained.
Tensor background_guidance_loss_grad(const ImageTensor& rainy, const ImageTensor& derained,
                                     const GaussianScaleConfig& cfg = {});

}  // namespace rainfree

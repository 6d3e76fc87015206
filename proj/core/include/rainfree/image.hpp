#pragma once

#include "rainfree/tensor.hpp"

namespace rainfree {

// An RGB image (or batch of them) is a Tensor with three channels whose values live in
// [0, 1] at every clamp barrier. Intermediate arithmetic may leave the range.
using ImageTensor = Tensor;

// Single-channel luminance, same N/H/W as the source image.
using LuminanceMap = Tensor;

inline constexpr int kMinPipelineSide = 16;

// Rec. 601 weights.
inline constexpr float kLumaR = 0.299F;
inline constexpr float kLumaG = 0.587F;
inline constexpr float kLumaB = 0.114F;

ImageTensor make_image(int height, int width, float fill = 0.0F);
ImageTensor make_image(int height, int width, float r, float g, float b);

// Throws std::invalid_argument unless `x` is N x 3 x H x W with H, W >= min_side.
void require_image(const Tensor& x, const char* what, int min_side = 1);

ImageTensor clamp01(const ImageTensor& x);
LuminanceMap to_luminance(const ImageTensor& x);

// Mean over every element of |a - b|.
double mean_abs_diff(const Tensor& a, const Tensor& b);
// d/da of mean_abs_diff(a, b); sign(0) is taken as 0.
Tensor mean_abs_diff_grad(const Tensor& a, const Tensor& b);

double mean_value(const Tensor& x);

ImageTensor flip_horizontal(const ImageTensor& x);

}  // namespace rainfree

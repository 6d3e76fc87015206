#include "rainfree/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rainfree {

ImageTensor make_image(int height, int width, float fill) {
  return Tensor({1, 3, height, width}, fill);
}

ImageTensor make_image(int height, int width, float r, float g, float b) {
  Tensor out({1, 3, height, width});
  const float rgb[3] = {r, g, b};
  for (int ch = 0; ch < 3; ++ch) std::fill_n(out.plane(0, ch), out.shape().plane(), rgb[ch]);
  return out;
}

void require_image(const Tensor& x, const char* what, int min_side) {
  if (x.n() < 1 || x.c() != 3 || x.h() < min_side || x.w() < min_side) {
    throw std::invalid_argument(std::string(what) + ": expected N x 3 x H x W image with H, W >= " +
                                std::to_string(min_side) + ", got " + x.shape().str());
  }
}

ImageTensor clamp01(const ImageTensor& x) {
  Tensor out = x;
  for (float& v : out.data()) v = std::clamp(v, 0.0F, 1.0F);
  return out;
}

LuminanceMap to_luminance(const ImageTensor& x) {
  require_image(x, "to_luminance");
  Tensor out({x.n(), 1, x.h(), x.w()});
  const auto plane = x.shape().plane();
  for (int n = 0; n < x.n(); ++n) {
    const float* r = x.plane(n, 0);
    const float* g = x.plane(n, 1);
    const float* b = x.plane(n, 2);
    float* dst = out.plane(n, 0);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  }
  return out;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs_diff");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
  return acc / static_cast<double>(a.size());
}

Tensor mean_abs_diff_grad(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs_diff_grad");
  Tensor g(a.shape());
  const float inv = a.empty() ? 0.0F : 1.0F / static_cast<float>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const float d = a[i] - b[i];
    g[i] = d > 0.0F ? inv : (d < 0.0F ? -inv : 0.0F);
  }
  return g;
}

double mean_value(const Tensor& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  return acc / static_cast<double>(x.size());
}

ImageTensor flip_horizontal(const ImageTensor& x) {
  Tensor out(x.shape());
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      for (int y = 0; y < x.h(); ++y) {
        for (int xx = 0; xx < x.w(); ++xx) out.at(n, c, y, xx) = x.at(n, c, y, x.w() - 1 - xx);
      }
    }
  }
  return out;
}

}  // namespace rainfree

#include "rainfree/blur_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rainfree {
namespace {

// Mirror index without edge repetition, valid for any offset.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Planar double buffer with the same layout as Tensor.
struct Planes {
  Shape shape;
  std::vector<double> v;

  explicit Planes(Shape s) : shape(s), v(s.numel(), 0.0) {}
  explicit Planes(const Tensor& t) : shape(t.shape()), v(t.data().begin(), t.data().end()) {}

  [[nodiscard]] int planes() const { return shape.n * shape.c; }
  double* plane(int p) { return v.data() + static_cast<std::size_t>(p) * shape.plane(); }
  [[nodiscard]] const double* plane(int p) const {
    return v.data() + static_cast<std::size_t>(p) * shape.plane();
  }
  [[nodiscard]] Tensor to_tensor() const {
    Tensor out(shape);
    std::transform(v.begin(), v.end(), out.data().begin(),
                   [](double d) { return static_cast<float>(d); });
    return out;
  }
};

// 1-D correlation of every line with reflect padding. `stride` walks along the line,
// `step` walks between lines.
void blur_lines(const double* src, double* dst, int len, int lines, std::size_t stride,
                std::size_t step, const std::vector<double>& k, std::vector<double>& scratch) {
  const int radius = static_cast<int>(k.size() / 2);
  scratch.resize(static_cast<std::size_t>(len + 2 * radius));
  for (int line = 0; line < lines; ++line) {
    const double* s = src + line * step;
    double* d = dst + line * step;
    for (int i = -radius; i < len + radius; ++i) {
      scratch[static_cast<std::size_t>(i + radius)] = s[reflect_index(i, len) * stride];
    }
    for (int i = 0; i < len; ++i) {
      double acc = 0.0;
      const double* p = scratch.data() + i;
      for (std::size_t t = 0; t < k.size(); ++t) acc += k[t] * p[t];
      d[i * stride] = acc;
    }
  }
}

// Transpose of blur_lines: scatter into the padded line, then fold the padding back.
void blur_lines_adjoint(const double* src, double* dst, int len, int lines, std::size_t stride,
                        std::size_t step, const std::vector<double>& k,
                        std::vector<double>& scratch) {
  const int radius = static_cast<int>(k.size() / 2);
  scratch.resize(static_cast<std::size_t>(len + 2 * radius));
  for (int line = 0; line < lines; ++line) {
    const double* s = src + line * step;
    double* d = dst + line * step;
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (int i = 0; i < len; ++i) {
      const double g = s[i * stride];
      double* p = scratch.data() + i;
      for (std::size_t t = 0; t < k.size(); ++t) p[t] += k[t] * g;
    }
    for (int i = 0; i < len; ++i) d[i * stride] = 0.0;
    for (int i = -radius; i < len + radius; ++i) {
      d[reflect_index(i, len) * stride] += scratch[static_cast<std::size_t>(i + radius)];
    }
  }
}

Planes blur(const Planes& x, double sigma) {
  const auto k = gaussian_kernel_1d(sigma);
  const int h = x.shape.h;
  const int w = x.shape.w;
  Planes tmp(x.shape);
  Planes out(x.shape);
  std::vector<double> scratch;
  for (int p = 0; p < x.planes(); ++p) {
    blur_lines(x.plane(p), tmp.plane(p), w, h, 1, static_cast<std::size_t>(w), k, scratch);
    blur_lines(tmp.plane(p), out.plane(p), h, w, static_cast<std::size_t>(w), 1, k, scratch);
  }
  return out;
}

Planes blur_adjoint(const Planes& g, double sigma) {
  const auto k = gaussian_kernel_1d(sigma);
  const int h = g.shape.h;
  const int w = g.shape.w;
  Planes tmp(g.shape);
  Planes out(g.shape);
  std::vector<double> scratch;
  for (int p = 0; p < g.planes(); ++p) {
    blur_lines_adjoint(g.plane(p), tmp.plane(p), h, w, static_cast<std::size_t>(w), 1, k,
                       scratch);
    blur_lines_adjoint(tmp.plane(p), out.plane(p), w, h, 1, static_cast<std::size_t>(w), k,
                       scratch);
  }
  return out;
}

void gradient(const Planes& x, Planes& gx, Planes& gy) {
  const int h = x.shape.h;
  const int w = x.shape.w;
  for (int p = 0; p < x.planes(); ++p) {
    const double* s = x.plane(p);
    double* dx = gx.plane(p);
    double* dy = gy.plane(p);
    for (int y = 0; y < h; ++y) {
      const int yp = std::min(y + 1, h - 1);
      const int ym = std::max(y - 1, 0);
      for (int xx = 0; xx < w; ++xx) {
        const int xp = std::min(xx + 1, w - 1);
        const int xm = std::max(xx - 1, 0);
        dx[y * w + xx] = 0.5 * (s[y * w + xp] - s[y * w + xm]);
        dy[y * w + xx] = 0.5 * (s[yp * w + xx] - s[ym * w + xx]);
      }
    }
  }
}

Planes gradient_adjoint(const Planes& gx, const Planes& gy) {
  const int h = gx.shape.h;
  const int w = gx.shape.w;
  Planes out(gx.shape);
  for (int p = 0; p < gx.planes(); ++p) {
    const double* dx = gx.plane(p);
    const double* dy = gy.plane(p);
    double* o = out.plane(p);
    for (int y = 0; y < h; ++y) {
      const int yp = std::min(y + 1, h - 1);
      const int ym = std::max(y - 1, 0);
      for (int xx = 0; xx < w; ++xx) {
        const int xp = std::min(xx + 1, w - 1);
        const int xm = std::max(xx - 1, 0);
        const double a = 0.5 * dx[y * w + xx];
        o[y * w + xp] += a;
        o[y * w + xm] -= a;
        const double b = 0.5 * dy[y * w + xx];
        o[yp * w + xx] += b;
        o[ym * w + xx] -= b;
      }
    }
  }
  return out;
}

Planes difference(const Tensor& a, const Tensor& b) {
  Planes d(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) d.v[i] = static_cast<double>(a[i]) - b[i];
  return d;
}

void require_blurrable(const Tensor& a, const Tensor& b, const char* what) {
  require_same_shape(a, b, what);
  if (a.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

}  // namespace

GaussianScaleConfig::GaussianScaleConfig()
    : GaussianScaleConfig({{3.0, 0.01}, {5.0, 0.1}, {9.0, 1.0}}) {}

GaussianScaleConfig::GaussianScaleConfig(std::vector<BlurScale> scales)
    : scales_(std::move(scales)) {
  if (scales_.empty()) throw std::invalid_argument("GaussianScaleConfig: no scales");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (!(scales_[i].sigma > 0.0) || !(scales_[i].lambda > 0.0)) {
      throw std::invalid_argument("GaussianScaleConfig: sigma and lambda must be positive");
    }
    if (i > 0 && !(scales_[i].sigma > scales_[i - 1].sigma)) {
      throw std::invalid_argument("GaussianScaleConfig: sigmas must be strictly increasing");
    }
  }
}

GaussianScaleConfig GaussianScaleConfig::parse(const std::string& text) {
  std::vector<BlurScale> scales;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("blur scale '" + item + "' is not sigma:lambda");
    }
    try {
      scales.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw std::invalid_argument("blur scale '" + item + "' is not numeric");
    }
  }
  return GaussianScaleConfig(std::move(scales));
}

std::string GaussianScaleConfig::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (i) os << ',';
    os << scales_[i].sigma << ':' << scales_[i].lambda;
  }
  return os.str();
}

std::vector<double> gaussian_kernel_1d(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian_kernel_1d: sigma must be positive, got " +
                                std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

Tensor gaussian_blur(const Tensor& x, double sigma) { return blur(Planes(x), sigma).to_tensor(); }

Tensor gaussian_blur_adjoint(const Tensor& g, double sigma) {
  return blur_adjoint(Planes(g), sigma).to_tensor();
}

GradientField spatial_gradient(const Tensor& x) {
  if (x.h() < 3 || x.w() < 3) {
    throw std::invalid_argument("spatial_gradient: need H, W >= 3, got " + x.shape().str());
  }
  Planes src(x);
  Planes gx(x.shape());
  Planes gy(x.shape());
  gradient(src, gx, gy);
  return {gx.to_tensor(), gy.to_tensor()};
}

Tensor spatial_gradient_adjoint(const GradientField& g) {
  require_same_shape(g.gx, g.gy, "spatial_gradient_adjoint");
  return gradient_adjoint(Planes(g.gx), Planes(g.gy)).to_tensor();
}

double blur_gradient_error(const Tensor& a, const Tensor& b, double sigma) {
  require_blurrable(a, b, "blur_gradient_error");
  // The operator is linear, so grad B(a) - grad B(b) = grad B(a - b).
  const Planes blurred = blur(difference(a, b), sigma);
  Planes gx(a.shape());
  Planes gy(a.shape());
  gradient(blurred, gx, gy);
  double acc = 0.0;
  for (std::size_t i = 0; i < gx.v.size(); ++i) acc += std::abs(gx.v[i]) + std::abs(gy.v[i]);
  return acc / (2.0 * static_cast<double>(gx.v.size()));
}

double background_guidance_loss(const ImageTensor& rainy, const ImageTensor& derained,
                                const GaussianScaleConfig& cfg) {
  double total = 0.0;
  for (const auto& s : cfg.scales()) total += s.lambda * blur_gradient_error(rainy, derained, s.sigma);
  return total;
}

Tensor background_guidance_loss_grad(const ImageTensor& rainy, const ImageTensor& derained,
                                     const GaussianScaleConfig& cfg) {
  require_blurrable(rainy, derained, "background_guidance_loss_grad");
  const Planes diff = difference(rainy, derained);
  const double count = 2.0 * static_cast<double>(diff.v.size());
  Planes acc(rainy.shape());
  for (const auto& s : cfg.scales()) {
    const Planes blurred = blur(diff, s.sigma);
    Planes gx(diff.shape);
    Planes gy(diff.shape);
    gradient(blurred, gx, gy);
    // d|d|/d(derained) = -sign(d) since d = grad B(rainy - derained).
    const double scale = -s.lambda / count;
    for (std::size_t i = 0; i < gx.v.size(); ++i) {
      gx.v[i] = gx.v[i] > 0.0 ? scale : (gx.v[i] < 0.0 ? -scale : 0.0);
      gy.v[i] = gy.v[i] > 0.0 ? scale : (gy.v[i] < 0.0 ? -scale : 0.0);
    }
    const Planes back = blur_adjoint(gradient_adjoint(gx, gy), s.sigma);
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += back.v[i];
  }
  return acc.to_tensor();
}

}  // namespace rainfree

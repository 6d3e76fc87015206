#include "rainfree/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rainfree/image.hpp"
#include "rainfree/luminance.hpp"
#include "rainfree/rain_guidance.hpp"

namespace rainfree::ag {
namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Index tables relating an image of size h x w to the patch matrix of a k x k
// convolution with the given stride and padding. -1 marks zero padding.
struct ColGeometry {
  int channels = 0;
  int h = 0;
  int w = 0;
  int k = 0;
  int oh = 0;
  int ow = 0;
  std::vector<int> ymap;  // k * oh
  std::vector<int> xmap;  // k * ow

  [[nodiscard]] int rows() const { return channels * k * k; }
  [[nodiscard]] int cols() const { return oh * ow; }
};

ColGeometry make_geometry(int channels, int h, int w, int k, int stride, int pad, PadMode mode,
                          int oh, int ow) {
  ColGeometry g{channels, h, w, k, oh, ow, {}, {}};
  auto fill = [&](std::vector<int>& map, int out, int size) {
    map.resize(static_cast<std::size_t>(k) * out);
    for (int t = 0; t < k; ++t) {
      for (int o = 0; o < out; ++o) {
        int i = o * stride - pad + t;
        if (i < 0 || i >= size) i = mode == PadMode::kReflect ? reflect_index(i, size) : -1;
        map[static_cast<std::size_t>(t) * out + o] = i;
      }
    }
  };
  fill(g.ymap, oh, h);
  fill(g.xmap, ow, w);
  return g;
}

void im2col(const float* img, const ColGeometry& g, float* col) {
  const std::size_t plane = static_cast<std::size_t>(g.h) * g.w;
  for (int c = 0; c < g.channels; ++c) {
    const float* src = img + c * plane;
    for (int ky = 0; ky < g.k; ++ky) {
      const int* ys = g.ymap.data() + static_cast<std::size_t>(ky) * g.oh;
      for (int kx = 0; kx < g.k; ++kx) {
        const int* xs = g.xmap.data() + static_cast<std::size_t>(kx) * g.ow;
        float* dst = col + (static_cast<std::size_t>((c * g.k + ky) * g.k + kx)) * g.cols();
        for (int oy = 0; oy < g.oh; ++oy) {
          float* row = dst + static_cast<std::size_t>(oy) * g.ow;
          const int iy = ys[oy];
          if (iy < 0) {
            std::fill_n(row, g.ow, 0.0F);
            continue;
          }
          const float* line = src + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.ow; ++ox) row[ox] = xs[ox] < 0 ? 0.0F : line[xs[ox]];
        }
      }
    }
  }
}

// Accumulates the patch matrix back onto img (adjoint of im2col).
void col2im(const float* col, const ColGeometry& g, float* img) {
  const std::size_t plane = static_cast<std::size_t>(g.h) * g.w;
  for (int c = 0; c < g.channels; ++c) {
    float* dst = img + c * plane;
    for (int ky = 0; ky < g.k; ++ky) {
      const int* ys = g.ymap.data() + static_cast<std::size_t>(ky) * g.oh;
      for (int kx = 0; kx < g.k; ++kx) {
        const int* xs = g.xmap.data() + static_cast<std::size_t>(kx) * g.ow;
        const float* src = col + (static_cast<std::size_t>((c * g.k + ky) * g.k + kx)) * g.cols();
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = ys[oy];
          if (iy < 0) continue;
          const float* row = src + static_cast<std::size_t>(oy) * g.ow;
          float* line = dst + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.ow; ++ox) {
            if (xs[ox] >= 0) line[xs[ox]] += row[ox];
          }
        }
      }
    }
  }
}

void add_bias(Tensor& out, const Tensor& bias) {
  for (int n = 0; n < out.n(); ++n) {
    for (int c = 0; c < out.c(); ++c) {
      float* p = out.plane(n, c);
      const float b = bias[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < out.shape().plane(); ++i) p[i] += b;
    }
  }
}

void accumulate_bias_grad(const Tensor& grad_out, Node& bias) {
  Tensor& db = bias.grad_buffer();
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int c = 0; c < grad_out.c(); ++c) {
      const float* p = grad_out.plane(n, c);
      double acc = 0.0;
      for (std::size_t i = 0; i < grad_out.shape().plane(); ++i) acc += p[i];
      db[static_cast<std::size_t>(c)] += static_cast<float>(acc);
    }
  }
}

void require_bias(const Var& bias, int channels, const char* what) {
  if (bias.defined() && bias.value().size() != static_cast<std::size_t>(channels)) {
    throw std::invalid_argument(std::string(what) + ": bias has " +
                                std::to_string(bias.value().size()) + " entries, expected " +
                                std::to_string(channels));
  }
}

std::vector<Var> inputs_of(const Var& x, const Var& w, const Var& b) {
  std::vector<Var> in{x, w};
  if (b.defined()) in.push_back(b);
  return in;
}

Var scalar_node(double value, std::vector<Var> inputs, BackwardFn fn) {
  return make_result(Tensor::scalar(static_cast<float>(value)), std::move(inputs), std::move(fn));
}

Tensor scaled(const Tensor& g, float s) {
  Tensor out = g;
  for (float& v : out.data()) v *= s;
  return out;
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, ConvSpec spec) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.c != xs.c || ws.h != ws.w) {
    throw std::invalid_argument("conv2d: weight " + ws.str() + " incompatible with input " +
                                xs.str());
  }
  require_bias(bias, ws.n, "conv2d");
  const int k = ws.h;
  if (spec.pad_mode == PadMode::kReflect && (spec.pad >= xs.h || spec.pad >= xs.w)) {
    throw std::invalid_argument("conv2d: reflect pad " + std::to_string(spec.pad) +
                                " too large for input " + xs.str());
  }
  const int oh = (xs.h + 2 * spec.pad - k) / spec.stride + 1;
  const int ow = (xs.w + 2 * spec.pad - k) / spec.stride + 1;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: input too small " + xs.str());

  auto geo = std::make_shared<ColGeometry>(
      make_geometry(xs.c, xs.h, xs.w, k, spec.stride, spec.pad, spec.pad_mode, oh, ow));
  Tensor out({xs.n, ws.n, oh, ow});
  std::vector<float> col(static_cast<std::size_t>(geo->rows()) * geo->cols());
  const CMapR wmat(weight.value().ptr(), ws.n, geo->rows());
  for (int n = 0; n < xs.n; ++n) {
    im2col(x.value().plane(n, 0), *geo, col.data());
    MapR o(out.plane(n, 0), ws.n, geo->cols());
    o.noalias() = wmat * CMapR(col.data(), geo->rows(), geo->cols());
  }
  if (bias.defined()) add_bias(out, bias.value());

  const bool has_bias = bias.defined();
  return make_result(std::move(out), inputs_of(x, weight, bias), [geo, has_bias](Node& self) {
    Node& xin = *self.inputs[0];
    Node& win = *self.inputs[1];
    const Tensor& gout = self.grad;
    const int cout = win.value.n();
    const CMapR wmat(win.value.ptr(), cout, geo->rows());
    std::vector<float> col(static_cast<std::size_t>(geo->rows()) * geo->cols());
    for (int n = 0; n < gout.n(); ++n) {
      const CMapR g(gout.plane(n, 0), cout, geo->cols());
      if (win.requires_grad) {
        im2col(xin.value.plane(n, 0), *geo, col.data());
        MapR dw(win.grad_buffer().ptr(), cout, geo->rows());
        dw.noalias() += g * CMapR(col.data(), geo->rows(), geo->cols()).transpose();
      }
      if (xin.requires_grad) {
        MapR dcol(col.data(), geo->rows(), geo->cols());
        dcol.noalias() = wmat.transpose() * g;
        col2im(col.data(), *geo, xin.grad_buffer().plane(n, 0));
      }
    }
    if (has_bias && self.inputs[2]->requires_grad) accumulate_bias_grad(gout, *self.inputs[2]);
  });
}

Var conv_transpose2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad,
                     int output_pad) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.n != xs.c || ws.h != ws.w) {
    throw std::invalid_argument("conv_transpose2d: weight " + ws.str() +
                                " incompatible with input " + xs.str());
  }
  if (output_pad < 0 || output_pad >= stride) {
    throw std::invalid_argument("conv_transpose2d: output padding must be in [0, stride)");
  }
  const int cout = ws.c;
  require_bias(bias, cout, "conv_transpose2d");
  const int k = ws.h;
  const int oh = (xs.h - 1) * stride - 2 * pad + k + output_pad;
  const int ow = (xs.w - 1) * stride - 2 * pad + k + output_pad;
  // The patch matrix of a forward conv over the (oh x ow) output has (xs.h x xs.w) columns.
  auto geo = std::make_shared<ColGeometry>(
      make_geometry(cout, oh, ow, k, stride, pad, PadMode::kZero, xs.h, xs.w));
  Tensor out({xs.n, cout, oh, ow});
  std::vector<float> col(static_cast<std::size_t>(geo->rows()) * geo->cols());
  const CMapR wmat(weight.value().ptr(), xs.c, geo->rows());
  for (int n = 0; n < xs.n; ++n) {
    MapR c(col.data(), geo->rows(), geo->cols());
    c.noalias() = wmat.transpose() * CMapR(x.value().plane(n, 0), xs.c, geo->cols());
    col2im(col.data(), *geo, out.plane(n, 0));
  }
  if (bias.defined()) add_bias(out, bias.value());

  const bool has_bias = bias.defined();
  return make_result(std::move(out), inputs_of(x, weight, bias), [geo, has_bias](Node& self) {
    Node& xin = *self.inputs[0];
    Node& win = *self.inputs[1];
    const Tensor& gout = self.grad;
    const int cin = win.value.n();
    const CMapR wmat(win.value.ptr(), cin, geo->rows());
    std::vector<float> col(static_cast<std::size_t>(geo->rows()) * geo->cols());
    for (int n = 0; n < gout.n(); ++n) {
      im2col(gout.plane(n, 0), *geo, col.data());
      const CMapR dcol(col.data(), geo->rows(), geo->cols());
      if (xin.requires_grad) {
        MapR dx(xin.grad_buffer().plane(n, 0), cin, geo->cols());
        dx.noalias() += wmat * dcol;
      }
      if (win.requires_grad) {
        MapR dw(win.grad_buffer().ptr(), cin, geo->rows());
        dw.noalias() += CMapR(xin.value.plane(n, 0), cin, geo->cols()) * dcol.transpose();
      }
    }
    if (has_bias && self.inputs[2]->requires_grad) accumulate_bias_grad(gout, *self.inputs[2]);
  });
}

Var instance_norm(const Var& x, const Var& gamma, const Var& beta, float eps) {
  const Shape s = x.shape();
  if (gamma.value().size() != static_cast<std::size_t>(s.c) ||
      beta.value().size() != static_cast<std::size_t>(s.c)) {
    throw std::invalid_argument("instance_norm: affine parameters do not match " + s.str());
  }
  const std::size_t plane = s.plane();
  auto xhat = std::make_shared<Tensor>(s);
  auto inv_std = std::make_shared<std::vector<float>>(static_cast<std::size_t>(s.n) * s.c);
  Tensor out(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const float* src = x.value().plane(n, c);
      double mean = 0.0;
      for (std::size_t i = 0; i < plane; ++i) mean += src[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::size_t i = 0; i < plane; ++i) var += (src[i] - mean) * (src[i] - mean);
      var /= static_cast<double>(plane);
      const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
      (*inv_std)[static_cast<std::size_t>(n) * s.c + c] = is;
      const float g = gamma.value()[static_cast<std::size_t>(c)];
      const float b = beta.value()[static_cast<std::size_t>(c)];
      float* xh = xhat->plane(n, c);
      float* dst = out.plane(n, c);
      const auto m = static_cast<float>(mean);
      for (std::size_t i = 0; i < plane; ++i) {
        xh[i] = (src[i] - m) * is;
        dst[i] = g * xh[i] + b;
      }
    }
  }
  return make_result(std::move(out), {x, gamma, beta}, [xhat, inv_std](Node& self) {
    Node& xin = *self.inputs[0];
    Node& gin = *self.inputs[1];
    Node& bin = *self.inputs[2];
    const Tensor& gout = self.grad;
    const Shape s = gout.shape();
    const std::size_t plane = s.plane();
    const auto m = static_cast<double>(plane);
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const float* go = gout.plane(n, c);
        const float* xh = xhat->plane(n, c);
        double sum_g = 0.0;
        double sum_gx = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_g += go[i];
          sum_gx += static_cast<double>(go[i]) * xh[i];
        }
        if (gin.requires_grad) gin.grad_buffer()[static_cast<std::size_t>(c)] += static_cast<float>(sum_gx);
        if (bin.requires_grad) bin.grad_buffer()[static_cast<std::size_t>(c)] += static_cast<float>(sum_g);
        if (xin.requires_grad) {
          const float g = gin.value[static_cast<std::size_t>(c)];
          const float is = (*inv_std)[static_cast<std::size_t>(n) * s.c + c];
          float* dx = xin.grad_buffer().plane(n, c);
          const auto mean_g = static_cast<float>(sum_g / m);
          const auto mean_gx = static_cast<float>(sum_gx / m);
          for (std::size_t i = 0; i < plane; ++i) {
            dx[i] += g * is * (go[i] - mean_g - xh[i] * mean_gx);
          }
        }
      }
    }
  });
}

Var relu(const Var& x) { return leaky_relu(x, 0.0F); }

Var leaky_relu(const Var& x, float slope) {
  Tensor out = x.value();
  for (float& v : out.data()) v = v > 0.0F ? v : slope * v;
  return make_result(std::move(out), {x}, [slope](Node& self) {
    Node& in = *self.inputs[0];
    Tensor& dx = in.grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      dx[i] += in.value[i] > 0.0F ? self.grad[i] : slope * self.grad[i];
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (auto& in : self.inputs) {
      if (in->requires_grad) in->accumulate(self.grad);
    }
  });
}

Var scale(const Var& x, float s) {
  return make_result(scaled(x.value(), s), {x}, [s](Node& self) {
    self.inputs[0]->accumulate(scaled(self.grad, s));
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(self.grad);
    if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(scaled(self.grad, -1.0F));
  });
}

Var shift_flip(const Var& x, int dy, int dx, bool flip) {
  const Tensor& v = x.value();
  const int h = v.h();
  const int w = v.w();
  // Output pixel (y, c) reads input row src_row[y], column src_col[c].
  std::vector<int> src_row(static_cast<std::size_t>(h));
  std::vector<int> src_col(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) src_row[static_cast<std::size_t>(y)] = ((y - dy) % h + h) % h;
  for (int c = 0; c < w; ++c) {
    const int s = ((c - dx) % w + w) % w;
    src_col[static_cast<std::size_t>(c)] = flip ? w - 1 - s : s;
  }
  Tensor out(v.shape());
  const std::size_t planes = static_cast<std::size_t>(v.n()) * v.c();
  const std::size_t plane = v.shape().plane();
  for (std::size_t p = 0; p < planes; ++p) {
    const float* in = v.ptr() + p * plane;
    float* o = out.ptr() + p * plane;
    for (int y = 0; y < h; ++y) {
      const float* row = in + static_cast<std::size_t>(src_row[static_cast<std::size_t>(y)]) * w;
      for (int c = 0; c < w; ++c) o[y * w + c] = row[src_col[static_cast<std::size_t>(c)]];
    }
  }
  return make_result(std::move(out), {x}, [src_row, src_col, planes, plane, h, w](Node& self) {
    Tensor& dx_buf = self.inputs[0]->grad_buffer();
    for (std::size_t p = 0; p < planes; ++p) {
      const float* g = self.grad.ptr() + p * plane;
      float* d = dx_buf.ptr() + p * plane;
      for (int y = 0; y < h; ++y) {
        float* row = d + static_cast<std::size_t>(src_row[static_cast<std::size_t>(y)]) * w;
        for (int c = 0; c < w; ++c) row[src_col[static_cast<std::size_t>(c)]] += g[y * w + c];
      }
    }
  });
}

Var clamp01_straight_through(const Var& x) {
  Tensor out = x.value();
  for (float& v : out.data()) v = std::clamp(v, 0.0F, 1.0F);
  return make_result(std::move(out), {x}, [](Node& self) {
    Node& in = *self.inputs[0];
    Tensor& dx = in.grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const float v = in.value[i];
      if (v >= 0.0F && v <= 1.0F) dx[i] += self.grad[i];
    }
  });
}

Var tanh_to_unit(const Var& h) {
  Tensor out = h.value();
  for (float& v : out.data()) v = 0.5F * (1.0F + std::tanh(v));
  return make_result(std::move(out), {h}, [](Node& self) {
    Tensor& dh = self.inputs[0]->grad_buffer();
    // y = (1 + tanh h) / 2  =>  dy/dh = 2 y (1 - y).
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      const float y = self.value[i];
      dh[i] += self.grad[i] * 2.0F * y * (1.0F - y);
    }
  });
}

Var tanh_residual(const Var& h, const Var& x) {
  require_same_shape(h.value(), x.value(), "tanh_residual");
  const std::size_t count = h.value().size();
  Tensor t(h.value().shape());
  Tensor out(h.value().shape());
  for (std::size_t i = 0; i < count; ++i) {
    t[i] = std::tanh(h.value()[i]);
    out[i] = std::clamp(x.value()[i] + t[i], 0.0F, 1.0F);
  }
  return make_result(std::move(out), {h, x}, [t = std::move(t)](Node& self) {
    const std::size_t n = self.value.size();
    const float* y = self.value.ptr();
    const float* g = self.grad.ptr();
    Node& hin = *self.inputs[0];
    Node& xin = *self.inputs[1];
    if (hin.requires_grad) {
      Tensor& dh = hin.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0F && y[i] < 1.0F) dh[i] += g[i] * (1.0F - t[i] * t[i]);
      }
    }
    if (xin.requires_grad) {
      Tensor& dx = xin.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0F && y[i] < 1.0F) dx[i] += g[i];
      }
    }
  });
}

Var weighted_sum(std::span<const Var> terms, std::span<const double> weights) {
  if (terms.size() != weights.size() || terms.empty()) {
    throw std::invalid_argument("weighted_sum: terms and weights must be non-empty and aligned");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) total += weights[k] * terms[k].value().item();
  std::vector<double> w(weights.begin(), weights.end());
  return scalar_node(total, std::vector<Var>(terms.begin(), terms.end()), [w](Node& self) {
    const double g = self.grad[0];
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      if (self.inputs[k]->requires_grad && w[k] != 0.0) {
        self.inputs[k]->grad_buffer()[0] += static_cast<float>(w[k] * g);
      }
    }
  });
}

Var mean_abs_diff(const Var& a, const Var& b) {
  const double v = rainfree::mean_abs_diff(a.value(), b.value());
  return scalar_node(v, {a, b}, [](Node& self) {
    const float g = self.grad[0];
    const Tensor d = rainfree::mean_abs_diff_grad(self.inputs[0]->value, self.inputs[1]->value);
    if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(scaled(d, g));
    if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(scaled(d, -g));
  });
}

Var background_guidance(const Var& rainy, const Var& derained, const GaussianScaleConfig& cfg) {
  const double v = background_guidance_loss(rainy.value(), derained.value(), cfg);
  return scalar_node(v, {rainy, derained}, [cfg](Node& self) {
    const float g = self.grad[0];
    // The loss depends on rainy - derained only, so the rainy gradient is the negation.
    const Tensor d =
        background_guidance_loss_grad(self.inputs[0]->value, self.inputs[1]->value, cfg);
    if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(scaled(d, g));
    if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(scaled(d, -g));
  });
}

Var rain_disc_loss(const Var& real_logits, const Var& fake_logits) {
  const double v = rain_guidance_discriminator_loss(real_logits.value(), fake_logits.value());
  return scalar_node(v, {real_logits, fake_logits}, [](Node& self) {
    const float g = self.grad[0];
    auto d = rain_guidance_discriminator_loss_grad(self.inputs[0]->value, self.inputs[1]->value);
    if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(scaled(d.d_real, g));
    if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(scaled(d.d_fake, g));
  });
}

Var rain_gen_loss(const Var& fake_logits) {
  const double v = rain_guidance_generator_loss(fake_logits.value());
  return scalar_node(v, {fake_logits}, [](Node& self) {
    self.inputs[0]->accumulate(
        scaled(rain_guidance_generator_loss_grad(self.inputs[0]->value), self.grad[0]));
  });
}

Var lum_disc_loss(const Var& clean_logits, const Var& enhanced_logits,
                  const Var& derained_logits) {
  const double v = lum_adv_discriminator_loss(clean_logits.value(), enhanced_logits.value(),
                                              derained_logits.value());
  return scalar_node(v, {clean_logits, enhanced_logits, derained_logits}, [](Node& self) {
    const float g = self.grad[0];
    auto d = lum_adv_discriminator_loss_grad(self.inputs[0]->value, self.inputs[1]->value,
                                             self.inputs[2]->value);
    const Tensor* parts[3] = {&d.d_clean, &d.d_enhanced, &d.d_derained};
    for (int k = 0; k < 3; ++k) {
      if (self.inputs[k]->requires_grad) self.inputs[k]->accumulate(scaled(*parts[k], g));
    }
  });
}

Var plain_disc_loss(const Var& clean_logits, const Var& derained_logits) {
  const double v = plain_adv_discriminator_loss(clean_logits.value(), derained_logits.value());
  return scalar_node(v, {clean_logits, derained_logits}, [](Node& self) {
    const float g = self.grad[0];
    auto d = rain_guidance_discriminator_loss_grad(self.inputs[0]->value, self.inputs[1]->value);
    if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(scaled(d.d_real, g));
    if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(scaled(d.d_fake, g));
  });
}

Var lum_gen_loss(const Var& derained_logits) {
  const double v = lum_adv_generator_loss(derained_logits.value());
  return scalar_node(v, {derained_logits}, [](Node& self) {
    self.inputs[0]->accumulate(
        scaled(lum_adv_generator_loss_grad(self.inputs[0]->value), self.grad[0]));
  });
}

}  // namespace rainfree::ag

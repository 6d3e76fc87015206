#pragma once

#include <span>

#include "rainfree/autograd.hpp"
#include "rainfree/blur_gradient.hpp"

namespace rainfree::ag {

enum class PadMode { kZero, kReflect };

struct ConvSpec {
  int stride = 1;
  int pad = 0;
  PadMode pad_mode = PadMode::kZero;
};

// weight: Cout x Cin x k x k, bias: 1 x Cout x 1 x 1 (optional, pass an undefined Var).
Var conv2d(const Var& x, const Var& weight, const Var& bias, ConvSpec spec);

// weight: Cin x Cout x k x k; output side (H - 1) * stride - 2 * pad + k + output_pad.
Var conv_transpose2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad,
                     int output_pad);

// Per-sample, per-channel normalization with affine gamma/beta (1 x C x 1 x 1).
Var instance_norm(const Var& x, const Var& gamma, const Var& beta, float eps = 1e-5F);

Var relu(const Var& x);
Var leaky_relu(const Var& x, float slope = 0.2F);

Var add(const Var& a, const Var& b);
Var scale(const Var& x, float s);
Var sub(const Var& a, const Var& b);

// Circular shift by (dy, dx), then an optional left-right mirror.
Var shift_flip(const Var& x, int dy, int dx, bool flip);

// Clamp to [0, 1] whose gradient passes unchanged inside the range and is zero outside.
Var clamp01_straight_through(const Var& x);

// 0.5 * (1 + tanh(h)).
Var tanh_to_unit(const Var& h);

// clamp01(x + tanh(h)); h = 0 reproduces x. Clamped outputs pass no gradient.
Var tanh_residual(const Var& h, const Var& x);

// Sum_k weights[k] * terms[k] for scalar terms.
Var weighted_sum(std::span<const Var> terms, std::span<const double> weights);

// Scalar loss nodes backed by the analytic gradients in the loss modules.
Var mean_abs_diff(const Var& a, const Var& b);
Var background_guidance(const Var& rainy, const Var& derained, const GaussianScaleConfig& cfg);
Var rain_disc_loss(const Var& real_logits, const Var& fake_logits);
Var rain_gen_loss(const Var& fake_logits);
Var lum_disc_loss(const Var& clean_logits, const Var& enhanced_logits, const Var& derained_logits);
Var plain_disc_loss(const Var& clean_logits, const Var& derained_logits);
Var lum_gen_loss(const Var& derained_logits);

}  // namespace rainfree::ag

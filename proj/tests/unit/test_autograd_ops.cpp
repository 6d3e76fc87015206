#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "rainfree/blur_gradient.hpp"
#include "rainfree/luminance.hpp"
#include "rainfree/ops.hpp"
#include "rainfree/rain_guidance.hpp"

using namespace rainfree;
using ag::Var;

namespace {

// sum(out * probe) for a fixed random probe, so every output element matters.
double probe_sum(const Tensor& out, const Tensor& probe) {
  double s = 0;
  for (std::size_t i = 0; i < out.size(); ++i) s += double(out[i]) * probe[i];
  return s;
}

Var probe_loss(const Var& out, const Tensor& probe) {
  // Linear in `out`: build it from ops so backward runs through the graph under test.
  return ag::make_result(Tensor::scalar(static_cast<float>(probe_sum(out.value(), probe))), {out},
                         [probe](ag::Node& self) {
                           Tensor g = probe;
                           for (float& v : g.data()) v *= self.grad[0];
                           self.inputs[0]->accumulate(g);
                         });
}

// Checks d/d(inputs[k]) of sum(f(inputs) * probe) against central differences.
void check_grads(const std::function<Var(const std::vector<Var>&)>& f, std::vector<Tensor> values,
                 double tol = 2e-3, double step = 1e-2) {
  std::vector<Var> vars;
  for (const auto& v : values) vars.push_back(ag::parameter(v));
  const Var out = f(vars);
  const Tensor probe = oracle::random_tensor(out.shape(), 777, -1, 1);
  ag::backward(probe_loss(out, probe));
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Tensor numeric = oracle::numeric_grad(
        [&](const Tensor& x) {
          std::vector<Var> in;
          for (std::size_t j = 0; j < values.size(); ++j) in.push_back(ag::constant(j == k ? x : values[j]));
          return probe_sum(f(in).value(), probe);
        },
        values[k], step);
    EXPECT_LT(oracle::relative_error(vars[k].grad(), numeric), tol) << "input " << k;
  }
}

}  // namespace

TEST(Autograd, BackwardRequiresScalarRoot) {
  const Var p = ag::parameter(Tensor({1, 1, 2, 2}, 1.0F));
  EXPECT_THROW(ag::backward(p), std::logic_error);
}

TEST(Autograd, ConstantsCarryNoHistory) {
  const Var a = ag::constant(Tensor({1, 1, 1, 1}, 2.0F));
  const Var b = ag::constant(Tensor({1, 1, 1, 1}, 3.0F));
  const Var s = ag::add(a, b);
  EXPECT_FALSE(s.requires_grad());
  EXPECT_TRUE(s.node()->inputs.empty());
}

TEST(Autograd, DetachStopsGradient) {
  const Var p = ag::parameter(Tensor({1, 1, 1, 1}, 2.0F));
  const Var d = ag::detach(ag::add(p, p));
  EXPECT_FALSE(d.requires_grad());
  const Var loss = ag::add(p, ag::detach(p));
  ag::backward(loss);
  EXPECT_EQ(p.grad()[0], 1.0F);
}

TEST(Autograd, SharedSubgraphAccumulates) {
  const Var p = ag::parameter(Tensor({1, 1, 1, 1}, 0.5F));
  const Var q = ag::add(p, p);
  ag::backward(ag::add(q, q));
  EXPECT_EQ(p.grad()[0], 4.0F);
}

TEST(Conv2d, ZeroPadStrideOneGradients) {
  check_grads([](const std::vector<Var>& v) { return ag::conv2d(v[0], v[1], v[2], {1, 1, ag::PadMode::kZero}); },
              {oracle::random_tensor({2, 3, 6, 5}, 1, -1, 1), oracle::random_tensor({4, 3, 3, 3}, 2, -1, 1),
               oracle::random_tensor({1, 4, 1, 1}, 3, -1, 1)});
}

TEST(Conv2d, ReflectPadStrideTwoGradients) {
  check_grads([](const std::vector<Var>& v) { return ag::conv2d(v[0], v[1], v[2], {2, 2, ag::PadMode::kReflect}); },
              {oracle::random_tensor({1, 2, 8, 8}, 4, -1, 1), oracle::random_tensor({3, 2, 5, 5}, 5, -1, 1),
               oracle::random_tensor({1, 3, 1, 1}, 6, -1, 1)});
}

TEST(Conv2d, MatchesDirectSum) {
  const Tensor x = oracle::random_tensor({1, 2, 5, 5}, 7, -1, 1);
  const Tensor w = oracle::random_tensor({1, 2, 3, 3}, 8, -1, 1);
  const Tensor y = ag::conv2d(ag::constant(x), ag::constant(w), Var(), {1, 0, ag::PadMode::kZero}).value();
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int c = 0; c < 2; ++c) {
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) acc += double(x.at(0, c, i + a, j + b)) * w.at(0, c, a, b);
        }
      }
      EXPECT_NEAR(y.at(0, 0, i, j), acc, 1e-5);
    }
  }
}

TEST(ConvTranspose2d, ShapeAndGradients) {
  const Var y = ag::conv_transpose2d(ag::constant(Tensor({1, 4, 5, 6})), ag::constant(Tensor({4, 2, 3, 3})), Var(), 2, 1, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 10, 12}));
  check_grads([](const std::vector<Var>& v) { return ag::conv_transpose2d(v[0], v[1], v[2], 2, 1, 1); },
              {oracle::random_tensor({2, 3, 4, 4}, 9, -1, 1), oracle::random_tensor({3, 2, 3, 3}, 10, -1, 1),
               oracle::random_tensor({1, 2, 1, 1}, 11, -1, 1)});
}

TEST(ConvTranspose2d, IsAdjointOfStridedConv) {
  const Tensor x = oracle::random_tensor({1, 3, 8, 8}, 12, -1, 1);
  const Tensor w = oracle::random_tensor({2, 3, 3, 3}, 13, -1, 1);
  const Tensor y = oracle::random_tensor({1, 2, 4, 4}, 14, -1, 1);
  const Tensor cx = ag::conv2d(ag::constant(x), ag::constant(w), Var(), {2, 1, ag::PadMode::kZero}).value();
  const Tensor ty = ag::conv_transpose2d(ag::constant(y), ag::constant(w), Var(), 2, 1, 1).value();
  EXPECT_NEAR(probe_sum(cx, y), probe_sum(x, ty), 1e-4);
}

TEST(InstanceNorm, NormalizesAndDifferentiates) {
  const Tensor x = oracle::random_tensor({2, 3, 4, 4}, 15, -2, 3);
  const Tensor y = ag::instance_norm(ag::constant(x), ag::constant(Tensor({1, 3, 1, 1}, 1.0F)),
                                     ag::constant(Tensor({1, 3, 1, 1}, 0.0F))).value();
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      double m = 0, v = 0;
      for (int i = 0; i < 16; ++i) m += y.plane(n, c)[i];
      m /= 16;
      for (int i = 0; i < 16; ++i) v += (y.plane(n, c)[i] - m) * (y.plane(n, c)[i] - m);
      EXPECT_NEAR(m, 0.0, 1e-5);
      EXPECT_NEAR(v / 16, 1.0, 1e-3);
    }
  }
  check_grads([](const std::vector<Var>& v) { return ag::instance_norm(v[0], v[1], v[2]); },
              {x, oracle::random_tensor({1, 3, 1, 1}, 16, 0.5, 1.5), oracle::random_tensor({1, 3, 1, 1}, 17, -1, 1)});
}

TEST(Activations, Gradients) {
  // Values kept away from the kink at zero.
  Tensor x = oracle::random_tensor({1, 2, 4, 4}, 18, 0.1, 1.0);
  for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
  check_grads([](const std::vector<Var>& v) { return ag::relu(v[0]); }, {x});
  check_grads([](const std::vector<Var>& v) { return ag::leaky_relu(v[0], 0.2F); }, {x});
  check_grads([](const std::vector<Var>& v) { return ag::sub(v[0], ag::add(v[1], v[1])); },
              {x, oracle::random_tensor(x.shape(), 21, -1, 1)});
  check_grads([](const std::vector<Var>& v) { return ag::scale(v[0], 0.3F); }, {x});
}

TEST(TanhToUnit, RangeIdentityAndGradients) {
  const Tensor h = oracle::random_tensor({1, 3, 4, 4}, 19, -2, 2);
  for (float v : oracle::values(ag::tanh_to_unit(ag::constant(h)).value())) {
    EXPECT_GT(v, 0.0F);
    EXPECT_LT(v, 1.0F);
  }
  check_grads([](const std::vector<Var>& v) { return ag::tanh_to_unit(v[0]); }, {h}, 2e-3, 1e-3);
}

TEST(TanhResidual, ZeroHeadIsIdentityAndClampsBlockGradient) {
  const Tensor x = oracle::random_tensor({1, 3, 4, 4}, 20, 0.05, 0.95);
  const Tensor same = ag::tanh_residual(ag::constant(Tensor(x.shape())), ag::constant(x)).value();
  EXPECT_EQ(oracle::values(same), oracle::values(x));
  // Small h keeps x + tanh(h) inside (0, 1), away from the clamp.
  const Tensor h = oracle::random_tensor(x.shape(), 21, -0.04, 0.04);
  check_grads([](const std::vector<Var>& v) { return ag::tanh_residual(v[0], v[1]); }, {h, x}, 2e-3, 1e-3);

  const Var hp = ag::parameter(Tensor({1, 1, 1, 2}, std::vector<float>{3.0F, -3.0F}));
  const Var xp = ag::parameter(Tensor({1, 1, 1, 2}, std::vector<float>{0.9F, 0.1F}));
  const Var y = ag::tanh_residual(hp, xp);
  EXPECT_EQ(y.value()[0], 1.0F);
  EXPECT_EQ(y.value()[1], 0.0F);
  ag::backward(probe_loss(y, Tensor({1, 1, 1, 2}, 1.0F)));
  EXPECT_EQ(hp.grad()[0], 0.0F);
  EXPECT_EQ(xp.grad()[1], 0.0F);
}

TEST(ClampStraightThrough, PassesGradientInsideRange) {
  const Var p = ag::parameter(Tensor({1, 1, 1, 3}, std::vector<float>{-0.5F, 0.5F, 1.5F}));
  const Var y = ag::clamp01_straight_through(p);
  EXPECT_EQ(y.value()[0], 0.0F);
  EXPECT_EQ(y.value()[2], 1.0F);
  ag::backward(probe_loss(y, Tensor({1, 1, 1, 3}, 1.0F)));
  EXPECT_EQ(p.grad()[1], 1.0F);
}

TEST(LossNodes, MatchScalarFunctionsAndTheirGradients) {
  const Tensor r = oracle::random_image(16, 16, 30);
  const Tensor c = oracle::random_image(16, 16, 31);
  const Var pc = ag::parameter(c);
  const Var bg = ag::background_guidance(ag::constant(r), pc, GaussianScaleConfig());
  EXPECT_NEAR(bg.value().item(), background_guidance_loss(r, c), 1e-6);
  ag::backward(bg);
  EXPECT_LT(oracle::relative_error(pc.grad(), background_guidance_loss_grad(r, c)), 1e-6);

  const Tensor real = oracle::random_tensor({1, 1, 2, 2}, 32, -2, 2);
  const Tensor fake = oracle::random_tensor({1, 1, 2, 2}, 33, -2, 2);
  const Tensor enh = oracle::random_tensor({1, 1, 2, 2}, 34, -2, 2);
  EXPECT_NEAR(ag::rain_disc_loss(ag::constant(real), ag::constant(fake)).value().item(),
              rain_guidance_discriminator_loss(real, fake), 1e-6);
  EXPECT_NEAR(ag::rain_gen_loss(ag::constant(fake)).value().item(), rain_guidance_generator_loss(fake), 1e-6);
  EXPECT_NEAR(ag::lum_disc_loss(ag::constant(real), ag::constant(enh), ag::constant(fake)).value().item(),
              lum_adv_discriminator_loss(real, enh, fake), 1e-6);
  EXPECT_NEAR(ag::plain_disc_loss(ag::constant(real), ag::constant(fake)).value().item(),
              plain_adv_discriminator_loss(real, fake), 1e-6);
  EXPECT_NEAR(ag::lum_gen_loss(ag::constant(fake)).value().item(), lum_adv_generator_loss(fake), 1e-6);

  const Var pf = ag::parameter(fake);
  ag::backward(ag::lum_gen_loss(pf));
  EXPECT_LT(oracle::relative_error(pf.grad(), lum_adv_generator_loss_grad(fake)), 1e-6);
}

TEST(WeightedSum, CombinesScalars) {
  const Var a = ag::parameter(Tensor::scalar(2.0F));
  const Var b = ag::parameter(Tensor::scalar(3.0F));
  const std::vector<Var> terms{a, b};
  const std::vector<double> w{0.5, 4.0};
  const Var s = ag::weighted_sum(terms, w);
  EXPECT_NEAR(s.value().item(), 13.0, 1e-6);
  ag::backward(s);
  EXPECT_NEAR(a.grad()[0], 0.5, 1e-7);
  EXPECT_NEAR(b.grad()[0], 4.0, 1e-7);
}

TEST(ShiftFlip, IsAPermutationWithMatchingGradient) {
  const Tensor x = oracle::random_image(6, 5, 9);
  const Tensor y = ag::shift_flip(ag::constant(x), 2, -1, true).value();
  // Row y reads row y - 2; column x reads the mirror of column x + 1.
  for (int yy = 0; yy < 6; ++yy) {
    for (int xx = 0; xx < 5; ++xx) {
      EXPECT_EQ(y.at(0, 1, yy, xx), x.at(0, 1, (yy - 2 + 6) % 6, 4 - (xx + 1) % 5));
    }
  }
  auto sorted = [](const Tensor& t) {
    auto v = oracle::values(t);
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(x), sorted(y));
  EXPECT_EQ(oracle::values(ag::shift_flip(ag::constant(x), 0, 0, false).value()), oracle::values(x));
  check_grads([](const std::vector<Var>& v) { return ag::shift_flip(v[0], -3, 7, false); }, {x});
  check_grads([](const std::vector<Var>& v) { return ag::shift_flip(v[0], 1, 1, true); }, {x});
}

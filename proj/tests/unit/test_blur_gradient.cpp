#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rainfree/blur_gradient.hpp"

using namespace rainfree;

TEST(GaussianKernel, LengthSymmetryAndNormalization) {
  for (double sigma : {0.5, 1.0, 1.5, 3.0, 5.0, 9.0}) {
    const auto k = gaussian_kernel_1d(sigma);
    EXPECT_EQ(k.size(), static_cast<std::size_t>(2 * std::ceil(3 * sigma) + 1));
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
    for (std::size_t i = 0; i < k.size(); ++i) EXPECT_DOUBLE_EQ(k[i], k[k.size() - 1 - i]);
  }
}

TEST(GaussianKernel, SigmaOne) {
  const auto k = gaussian_kernel_1d(1.0);
  ASSERT_EQ(k.size(), 7U);
  double z = 0;
  for (int x = -3; x <= 3; ++x) z += std::exp(-x * x / 2.0);
  EXPECT_NEAR(k[3], 1.0 / z, 1e-12);
  EXPECT_NEAR(k[3] * z * 0.3989422804, 0.3989422804, 1e-9);
}

TEST(GaussianKernel, RejectsNonPositiveSigma) {
  EXPECT_THROW(gaussian_kernel_1d(0.0), std::invalid_argument);
  EXPECT_THROW(gaussian_kernel_1d(-1.0), std::invalid_argument);
}

TEST(GaussianBlur, MatchesDirectTwoDimensionalConvolution) {
  for (double sigma : {1.0, 3.0}) {
    const Tensor x = oracle::random_image(12, 15, 11);
    const Tensor got = gaussian_blur(x, sigma);
    const Tensor want = oracle::blur(x, sigma);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-5);
  }
}

TEST(GaussianBlur, KernelWiderThanImageStillWellDefined) {
  const Tensor x = oracle::random_image(6, 6, 4);
  const Tensor got = gaussian_blur(x, 9.0);
  const Tensor want = oracle::blur(x, 9.0);
  for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-5);
}

TEST(GaussianBlur, PreservesConstantImages) {
  const Tensor x = make_image(10, 10, 0.37F);
  for (float v : oracle::values(gaussian_blur(x, 5.0))) EXPECT_NEAR(v, 0.37F, 1e-6);
}

TEST(GaussianBlur, AdjointIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor x = oracle::random_image(9, 13, seed);
    const Tensor y = oracle::random_image(9, 13, seed + 100);
    const Tensor bx = gaussian_blur(x, 3.0);
    const Tensor bty = gaussian_blur_adjoint(y, 3.0);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lhs += double(bx[i]) * y[i];
      rhs += double(x[i]) * bty[i];
    }
    EXPECT_NEAR(lhs, rhs, 1e-4 * std::abs(lhs));
  }
}

TEST(SpatialGradient, VerticalStepEdge) {
  Tensor x = make_image(6, 8);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 6; ++y) {
      for (int xx = 4; xx < 8; ++xx) x.at(0, c, y, xx) = 1.0F;
    }
  }
  const GradientField g = spatial_gradient(x);
  for (int y = 0; y < 6; ++y) {
    for (int xx = 0; xx < 8; ++xx) {
      const float want = (xx == 3 || xx == 4) ? 0.5F : 0.0F;
      EXPECT_EQ(g.gx.at(0, 0, y, xx), want);
      EXPECT_EQ(g.gy.at(0, 0, y, xx), 0.0F);
    }
  }
}

TEST(SpatialGradient, MatchesOracleAndRejectsTinyImages) {
  const Tensor x = oracle::random_image(5, 7, 2);
  const GradientField g = spatial_gradient(x);
  std::vector<double> gx, gy;
  oracle::gradient(oracle::plane(x, 0, 1), 5, 7, gx, gy);
  for (int i = 0; i < 35; ++i) {
    EXPECT_NEAR(g.gx.plane(0, 1)[i], gx[i], 1e-7);
    EXPECT_NEAR(g.gy.plane(0, 1)[i], gy[i], 1e-7);
  }
  EXPECT_THROW(spatial_gradient(make_image(2, 5)), std::invalid_argument);
  EXPECT_THROW(spatial_gradient(make_image(5, 2)), std::invalid_argument);
}

TEST(SpatialGradient, AdjointIdentity) {
  const Tensor x = oracle::random_image(7, 9, 5);
  const GradientField g{oracle::random_image(7, 9, 6), oracle::random_image(7, 9, 7)};
  const GradientField dx = spatial_gradient(x);
  const Tensor dtg = spatial_gradient_adjoint(g);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lhs += double(dx.gx[i]) * g.gx[i] + double(dx.gy[i]) * g.gy[i];
    rhs += double(x[i]) * dtg[i];
  }
  EXPECT_NEAR(lhs, rhs, 1e-4 * std::abs(lhs));
}

TEST(ScaleConfig, DefaultsParseAndValidation) {
  const GaussianScaleConfig d;
  ASSERT_EQ(d.scales().size(), 3U);
  EXPECT_EQ(d.scales()[0].sigma, 3.0);
  EXPECT_EQ(d.scales()[0].lambda, 0.01);
  EXPECT_EQ(d.scales()[1].sigma, 5.0);
  EXPECT_EQ(d.scales()[1].lambda, 0.1);
  EXPECT_EQ(d.scales()[2].sigma, 9.0);
  EXPECT_EQ(d.scales()[2].lambda, 1.0);
  const auto p = GaussianScaleConfig::parse(d.str());
  EXPECT_EQ(p.str(), d.str());
  EXPECT_THROW(GaussianScaleConfig::parse("3:0.1,oops"), std::invalid_argument);
  EXPECT_THROW(GaussianScaleConfig({{0.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(GaussianScaleConfig({{2.0, -1.0}}), std::invalid_argument);
}

TEST(BackgroundGuidance, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Tensor r = oracle::random_image(16, 16, seed);
    const Tensor c = oracle::random_image(16, 16, seed + 50);
    double want = 0;
    const GaussianScaleConfig cfg;
    for (const auto& s : cfg.scales()) {
      want += s.lambda * oracle::blur_gradient_error(r, c, s.sigma);
    }
    EXPECT_NEAR(background_guidance_loss(r, c), want, 1e-6 * want + 1e-9);
    EXPECT_NEAR(blur_gradient_error(r, c, 5.0), oracle::blur_gradient_error(r, c, 5.0), 1e-8);
  }
}

TEST(BackgroundGuidance, ZeroForIdenticalAndShiftInvariant) {
  const Tensor r = oracle::random_image(16, 16, 9);
  EXPECT_EQ(background_guidance_loss(r, r), 0.0);
  Tensor shifted = r;
  for (float& v : shifted.data()) v += 0.2F;
  EXPECT_NEAR(background_guidance_loss(r, shifted), 0.0, 1e-7);
}

TEST(BackgroundGuidance, GradientMatchesFiniteDifferences) {
  const Tensor r = oracle::random_image(16, 16, 21);
  const Tensor c = oracle::random_image(16, 16, 22);
  const Tensor analytic = background_guidance_loss_grad(r, c);
  const Tensor numeric = oracle::numeric_grad(
      [&](const Tensor& x) { return background_guidance_loss(r, x); }, c);
  EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-3);
}

TEST(BackgroundGuidance, ShapeMismatch) {
  EXPECT_THROW(background_guidance_loss(make_image(8, 8), make_image(8, 9)), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rainfree/adversarial.hpp"
#include "rainfree/rain_guidance.hpp"

using namespace rainfree;

namespace {

Tensor logits(std::initializer_list<float> v) {
  return Tensor({1, 1, 1, static_cast<int>(v.size())}, std::vector<float>(v));
}

}  // namespace

TEST(Streaks, ExtractIsUnclampedDifference) {
  const Tensor r = make_image(4, 4, 0.2F);
  const Tensor c = make_image(4, 4, 0.7F);
  for (float v : oracle::values(extract_streaks(r, c))) EXPECT_NEAR(v, -0.5F, 1e-7);
}

TEST(Streaks, ComposeClamps) {
  const Tensor s = make_image(2, 2, 0.6F);
  const Tensor c = make_image(2, 2, 0.7F);
  for (float v : oracle::values(compose_fake_rainy(s, c))) EXPECT_EQ(v, 1.0F);
  const Tensor neg = make_image(2, 2, -0.9F);
  for (float v : oracle::values(compose_fake_rainy(neg, c))) EXPECT_EQ(v, 0.0F);
}

TEST(Streaks, RoundTripOnUnclampedData) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor c = oracle::random_tensor({1, 3, 8, 8}, seed, 0.1, 0.5);
    const Tensor r = oracle::random_tensor({1, 3, 8, 8}, seed + 99, 0.2, 0.6);
    const Tensor back = compose_fake_rainy(extract_streaks(r, c), c);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(back[i], r[i], 1e-6);
  }
}

TEST(Streaks, ShapeMismatch) {
  EXPECT_THROW(extract_streaks(make_image(4, 4), make_image(4, 8)), std::invalid_argument);
  EXPECT_THROW(compose_fake_rainy(make_image(4, 4), make_image(8, 4)), std::invalid_argument);
}

TEST(RainDiscriminatorLoss, Examples) {
  EXPECT_NEAR(rain_guidance_discriminator_loss(logits({0, 0}), logits({0, 0})), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(rain_guidance_discriminator_loss(logits({1}), logits({-1})), 2 * oracle::softplus(-1), 1e-12);
  EXPECT_NEAR(rain_guidance_discriminator_loss(logits({1}), logits({-1})), 0.6265, 1e-4);
}

TEST(RainDiscriminatorLoss, StableForLargeLogits) {
  EXPECT_NEAR(rain_guidance_discriminator_loss(logits({200}), logits({-200})), 0.0, 1e-12);
  EXPECT_NEAR(rain_guidance_discriminator_loss(logits({-200}), logits({200})), 400.0, 1e-9);
}

TEST(RainDiscriminatorLoss, RejectsNonFinite) {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(rain_guidance_discriminator_loss(logits({nan}), logits({0})), std::domain_error);
  EXPECT_THROW(rain_guidance_generator_loss(logits({std::numeric_limits<float>::infinity()})),
               std::domain_error);
}

TEST(RainGeneratorLoss, Example) {
  EXPECT_NEAR(rain_guidance_generator_loss(logits({-2})), 2.1269, 1e-4);
  EXPECT_NEAR(rain_guidance_generator_loss(logits({-2, 0})), (oracle::softplus(2) + std::log(2.0)) / 2, 1e-12);
}

TEST(RainLossGradients, MatchFiniteDifferences) {
  const Tensor real = oracle::random_tensor({1, 1, 4, 4}, 1, -3, 3);
  const Tensor fake = oracle::random_tensor({1, 1, 4, 4}, 2, -3, 3);
  const LogitPairGrad g = rain_guidance_discriminator_loss_grad(real, fake);
  const Tensor nr = oracle::numeric_grad(
      [&](const Tensor& x) { return rain_guidance_discriminator_loss(x, fake); }, real);
  const Tensor nf = oracle::numeric_grad(
      [&](const Tensor& x) { return rain_guidance_discriminator_loss(real, x); }, fake);
  EXPECT_LT(oracle::relative_error(g.d_real, nr), 1e-3);
  EXPECT_LT(oracle::relative_error(g.d_fake, nf), 1e-3);
  const Tensor ng = oracle::numeric_grad([](const Tensor& x) { return rain_guidance_generator_loss(x); }, fake);
  EXPECT_LT(oracle::relative_error(rain_guidance_generator_loss_grad(fake), ng), 1e-3);
}

TEST(RainLossProperty, DiscriminatorLossMonotoneInLogits) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor real = oracle::random_tensor({1, 1, 2, 2}, seed, -2, 2);
    const Tensor fake = oracle::random_tensor({1, 1, 2, 2}, seed + 7, -2, 2);
    Tensor real_up = real;
    Tensor fake_down = fake;
    for (float& v : real_up.data()) v += 0.5F;
    for (float& v : fake_down.data()) v -= 0.5F;
    const double base = rain_guidance_discriminator_loss(real, fake);
    EXPECT_LT(rain_guidance_discriminator_loss(real_up, fake), base);
    EXPECT_LT(rain_guidance_discriminator_loss(real, fake_down), base);
    EXPECT_GT(rain_guidance_discriminator_loss(real, fake), 0.0);
  }
}

TEST(Adversarial, SoftplusAndSigmoid) {
  EXPECT_NEAR(adversarial::softplus(0), std::log(2.0), 1e-15);
  EXPECT_NEAR(adversarial::softplus(50), 50.0, 1e-12);
  EXPECT_NEAR(adversarial::softplus(-50), std::exp(-50.0), 1e-30);
  EXPECT_NEAR(adversarial::sigmoid(0), 0.5, 1e-15);
  EXPECT_THROW(rain_guidance_discriminator_loss(Tensor(), logits({0})), std::invalid_argument);
  EXPECT_THROW(adversarial::require_finite_logits(Tensor(), "x"), std::invalid_argument);
}

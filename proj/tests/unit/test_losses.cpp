#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rainfree/losses.hpp"
#include "rainfree/ops.hpp"

using namespace rainfree;

TEST(TotalGeneratorLoss, DefaultWeightsOnUnitParts) {
  EXPECT_DOUBLE_EQ(total_generator_loss({1, 1, 1, 1}, LossWeights{}), 7.5);
  EXPECT_DOUBLE_EQ(total_generator_loss({0, 0, 0, 0}, LossWeights{}), 0.0);
  EXPECT_DOUBLE_EQ(total_generator_loss({9, 9, 9, 2}, LossWeights{0, 0, 0, 1}), 2.0);
}

TEST(TotalGeneratorLoss, NamesNonFiniteComponent) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  const std::array<std::pair<LossParts, const char*>, 4> cases = {{
      {{nan, 0, 0, 0}, "guid_r"},
      {{0, inf, 0, 0}, "guid_b"},
      {{0, 0, -inf, 0}, "lum_adv_g"},
      {{0, 0, 0, nan}, "cyc"},
  }};
  for (const auto& [parts, name] : cases) {
    try {
      (void)total_generator_loss(parts, LossWeights{});
      ADD_FAILURE() << name;
    } catch (const std::domain_error& e) {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
    }
  }
}

TEST(TotalGeneratorLossProperty, LinearInWeights) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const LossParts p{u(rng), u(rng), u(rng), u(rng)};
    const LossWeights a{u(rng), u(rng), u(rng), u(rng)};
    const LossWeights b{u(rng), u(rng), u(rng), u(rng)};
    const LossWeights sum{a.w1 + b.w1, a.w2 + b.w2, a.w3 + b.w3, a.w4 + b.w4};
    EXPECT_NEAR(total_generator_loss(p, sum),
                total_generator_loss(p, a) + total_generator_loss(p, b), 1e-12);
  }
}

TEST(LossWeights, RejectsNegativeOrNonFinite) {
  EXPECT_NO_THROW(LossWeights{}.validate());
  EXPECT_THROW((LossWeights{-1, 5, 1, 0.5}).validate(), std::invalid_argument);
  EXPECT_THROW((LossWeights{1, std::nan(""), 1, 0.5}).validate(), std::invalid_argument);
}

TEST(CycleLoss, MeanAbsoluteDifference) {
  const Tensor a = oracle::random_image(5, 7, 1);
  const Tensor b = oracle::random_image(5, 7, 2);
  EXPECT_NEAR(cycle_loss(a, b), oracle::mean_of(ag::sub(ag::constant(a), ag::constant(b)).value(),
                                                [](double x) { return std::abs(x); }),
              1e-7);
  EXPECT_DOUBLE_EQ(cycle_loss(a, a), 0.0);
  EXPECT_NEAR(cycle_loss(make_image(4, 4, 0.2F), make_image(4, 4, 0.7F)), 0.5, 1e-7);
  EXPECT_THROW((void)cycle_loss(a, oracle::random_image(5, 6, 1)), std::invalid_argument);
}

namespace {

// Weighted sum of four scalar functions of one input, differentiated by the graph.
struct Probe {
  ag::Var x;
  std::array<ag::Var, 4> terms;
};

Probe make_probe(const Tensor& value) {
  Probe p;
  p.x = ag::parameter(value);
  const ag::Var target = ag::constant(make_image(value.h(), value.w(), 0.4F));
  p.terms = {ag::mean_abs_diff(p.x, target),
             ag::background_guidance(ag::constant(make_image(value.h(), value.w(), 0.3F)), p.x,
                                     GaussianScaleConfig{}),
             ag::lum_gen_loss(ag::sub(p.x, target)),
             ag::rain_gen_loss(ag::add(p.x, p.x))};
  return p;
}

Tensor grad_of(const Tensor& value, const std::array<double, 4>& w) {
  Probe p = make_probe(value);
  ag::backward(ag::weighted_sum(p.terms, w));
  return p.x.grad().size() == value.size() ? p.x.grad() : Tensor(value.shape());
}

}  // namespace

TEST(TotalGeneratorLoss, ZeroWeightTermContributesNoGradient) {
  const Tensor v = oracle::random_tensor({1, 3, 16, 16}, 4, 0.05, 0.95);
  const Tensor all = grad_of(v, {1, 5, 1, 0.5});
  const Tensor without_first = grad_of(v, {0, 5, 1, 0.5});
  const Tensor rest = grad_of(v, {1, 0, 0, 0});
  double gap = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    gap = std::max(gap, std::abs(static_cast<double>(all[i]) - without_first[i] - rest[i]));
  }
  EXPECT_LT(gap, 1e-6);
  const Tensor none = grad_of(v, {0, 0, 0, 0});
  ASSERT_EQ(none.size(), v.size());
  for (float g : oracle::values(none)) EXPECT_EQ(g, 0.0F);
}

TEST(TotalGeneratorLoss, GradientIsWeightedSumOfPerTermGradients) {
  const Tensor v = oracle::random_tensor({1, 3, 16, 16}, 8, 0.05, 0.95);
  const std::array<double, 4> w{1, 5, 1, 0.5};
  const Tensor total = grad_of(v, w);
  Tensor sum(v.shape());
  for (int k = 0; k < 4; ++k) {
    std::array<double, 4> one{0, 0, 0, 0};
    one[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)];
    const Tensor g = grad_of(v, one);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
  }
  EXPECT_LT(oracle::relative_error(total, sum), 1e-6);
}

TEST(LossBundle, FiniteCheckAndFormatting) {
  LossBundle b;
  b.cyc = 0.25;
  EXPECT_TRUE(b.all_finite());
  EXPECT_NE(b.str().find("cyc"), std::string::npos);
  b.d_s = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(b.all_finite());
}

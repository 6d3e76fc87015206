#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rainfree/metrics.hpp"
#include "rainfree/png_io.hpp"
#include "test_dirs.hpp"

using namespace rainfree;

TEST(Psnr, MatchesOracleOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Tensor a = oracle::random_image(32, 32, 2 * seed);
    const Tensor b = oracle::random_image(32, 32, 2 * seed + 1);
    EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-6);
  }
}

TEST(Psnr, CapAndUniformOffset) {
  const Tensor a = oracle::random_image(8, 8, 1);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  const Tensor x = make_image(8, 8, 0.3F);
  const Tensor y = make_image(8, 8, 0.4F);
  // 0.1 is not representable; the float offset differs from 0.1 by ~1e-8.
  EXPECT_NEAR(psnr(x, y), 20.0, 1e-5);
}

TEST(PsnrProperty, SymmetricAndMonotoneInNoise) {
  const Tensor clean = oracle::random_image(16, 16, 3);
  const Tensor noise = oracle::random_tensor(clean.shape(), 4, -1, 1);
  double prev = kPsnrCap + 1;
  for (float amp : {0.01F, 0.02F, 0.05F, 0.1F, 0.2F}) {
    Tensor noisy = clean;
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += amp * noise[i];
    const double p = psnr(clean, noisy);
    EXPECT_DOUBLE_EQ(p, psnr(noisy, clean));
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Psnr, RejectsShapeMismatch) {
  EXPECT_THROW((void)psnr(make_image(4, 4), make_image(4, 5)), std::invalid_argument);
}

TEST(Ssim, MatchesOracleOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Tensor a = oracle::random_image(32, 32, 100 + 2 * seed);
    const Tensor b = oracle::random_image(32, 32, 101 + 2 * seed);
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-6);
  }
  // Correlated pairs exercise the structure term away from zero.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor a = oracle::random_image(24, 20, seed);
    Tensor b = a;
    const Tensor n = oracle::random_tensor(a.shape(), seed + 50, -0.1, 0.1);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += n[i];
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-6);
  }
}

TEST(Ssim, IdentityAndInversion) {
  const Tensor a = oracle::random_image(16, 16, 7);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  Tensor inv = a;
  for (float& v : inv.data()) v = 1.0F - v;
  EXPECT_LT(ssim(a, inv), 0.5);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const double x = 0.2;
  const double y = 0.6;
  const double want = (2 * x * y + kSsimC1) / (x * x + y * y + kSsimC1);
  EXPECT_NEAR(ssim(make_image(12, 12, 0.2F), make_image(12, 12, 0.6F)), want, 1e-6);
}

TEST(Ssim, RejectsImagesSmallerThanWindow) {
  EXPECT_THROW((void)ssim(make_image(10, 16), make_image(10, 16)), std::invalid_argument);
  EXPECT_NO_THROW((void)ssim(make_image(11, 11), make_image(11, 11)));
}

TEST(SsimProperty, SymmetricAndFlipInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor a = oracle::random_image(16, 14, seed);
    const Tensor b = oracle::random_image(16, 14, seed + 20);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    Tensor fa = a;
    Tensor fb = b;
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 14; ++x) {
          fa.at(0, c, y, x) = a.at(0, c, y, 13 - x);
          fb.at(0, c, y, x) = b.at(0, c, y, 13 - x);
        }
      }
    }
    EXPECT_NEAR(ssim(fa, fb), ssim(a, b), 1e-9);
  }
}

TEST(Evaluate, IdentityOnCleanPairsHitsCaps) {
  std::vector<PairedSample> pairs;
  for (int i = 0; i < 3; ++i) {
    const Tensor g = oracle::random_image(16, 16, static_cast<std::uint64_t>(i));
    pairs.push_back({"p" + std::to_string(i), g, g});
  }
  const EvalReport r = evaluate([](const ImageTensor& x) { return x; }, pairs, "identity");
  EXPECT_EQ(r.num_ok(), 3);
  EXPECT_DOUBLE_EQ(r.mean_psnr, kPsnrCap);
  EXPECT_NEAR(r.mean_ssim, 1.0, 1e-12);
  EXPECT_EQ(r.model_tag, "identity");
}

TEST(Evaluate, FailedEntriesAreExcludedFromMeans) {
  std::vector<PairedSample> pairs;
  const Tensor g = oracle::random_image(16, 16, 1);
  pairs.push_back({"good", g, g});
  pairs.push_back({"bad", make_image(16, 16, 0.5F), g});
  const EvalReport r = evaluate(
      [](const ImageTensor& x) {
        if (x[0] == 0.5F) throw std::runtime_error("boom");
        return x;
      },
      pairs, "t");
  ASSERT_EQ(r.per_image.size(), 2U);
  EXPECT_TRUE(r.per_image[0].ok());
  EXPECT_FALSE(r.per_image[1].ok());
  EXPECT_EQ(r.num_failed(), 1);
  EXPECT_DOUBLE_EQ(r.mean_psnr, kPsnrCap);

  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_NE(csv.str().find("bad"), std::string::npos);
  EXPECT_NE(csv.str().find("boom"), std::string::npos);
  EXPECT_NE(r.table().find("good"), std::string::npos);
}

TEST(EvaluateDir, ShapeMismatchBecomesFailedEntry) {
  TempDir dir("metrics");
  std::filesystem::create_directories(dir.path() / "rainy");
  std::filesystem::create_directories(dir.path() / "gt");
  const Tensor a = oracle::random_image(12, 12, 1);
  write_png(dir.path() / "rainy" / "a.png", a);
  write_png(dir.path() / "gt" / "a.png", a);
  write_png(dir.path() / "rainy" / "b.png", make_image(12, 12, 0.5F));
  write_png(dir.path() / "gt" / "b.png", make_image(12, 14, 0.5F));
  const EvalReport r = evaluate_dir([](const ImageTensor& x) { return x; }, dir.path(), "id");
  EXPECT_EQ(r.num_ok(), 1);
  EXPECT_EQ(r.num_failed(), 1);
  EXPECT_DOUBLE_EQ(r.mean_psnr, kPsnrCap);

  write_png(dir.path() / "rainy" / "c.png", a);
  EXPECT_THROW((void)evaluate_dir([](const ImageTensor& x) { return x; }, dir.path(), "id"),
               std::runtime_error);
}

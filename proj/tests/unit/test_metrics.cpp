#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eustwin/error.hpp"
#include "eustwin/imaging.hpp"
#include "eustwin/metrics.hpp"
#include "eustwin/phantom.hpp"
#include "eustwin/scanner.hpp"

using namespace eustwin;

namespace {

RegionStats stats(double mean, double std, double max = 0.0) {
  RegionStats s;
  s.mean = mean;
  s.std = std;
  s.max = max;
  s.count = 1;
  return s;
}

Eigen::MatrixXd random_image(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
  return m;
}

}  // namespace

TEST(Fwhm, SampledGaussian) {
  std::vector<double> g;
  for (int i = -1000; i <= 1000; ++i) g.push_back(std::exp(-0.5 * (i * 0.01) * (i * 0.01)));
  EXPECT_NEAR(fwhm(g, 0.01), 2.0 * std::sqrt(2.0 * std::log(2.0)), 1e-3);
}

TEST(Fwhm, TriangleIsExact) {
  std::vector<double> t(41, 0.0);
  for (int i = 0; i <= 40; ++i) t[static_cast<std::size_t>(i)] = std::max(0.0, 1.0 - std::abs(i - 20) / 10.0);
  EXPECT_NEAR(fwhm(t, 1.0), 10.0, 1e-12);
  EXPECT_NEAR(fwhm(t, 0.5), 5.0, 1e-12);
}

TEST(Fwhm, PeakAtBoundaryThrows) {
  const std::vector<double> ramp{1.0, 0.9, 0.8, 0.3, 0.1};
  EXPECT_THROW(fwhm(ramp, 1.0), BoundaryError);
  const std::vector<double> flat{0.6, 0.8, 1.0};
  EXPECT_THROW(fwhm(flat, 1.0), BoundaryError);
  EXPECT_THROW(fwhm(std::vector<double>{}, 1.0), DataError);
}

TEST(Esnr, Examples) {
  EXPECT_NEAR(esnr(stats(0, 0, 1.0), stats(0, 0.001)), 60.0, 1e-12);
  EXPECT_NEAR(esnr(stats(0, 0, 1.0), stats(0, 1.0)), 0.0, 1e-12);
  EXPECT_THROW(esnr(stats(0, 0, 1.0), stats(0, 0.0)), UndefinedMetric);
}

TEST(Esnr, ScalingProperties) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double s = u(rng), n = u(rng), k = u(rng);
    const double base = esnr(stats(0, 0, s), stats(0, n));
    EXPECT_NEAR(esnr(stats(0, 0, k * s), stats(0, k * n)), base, 1e-9);
    EXPECT_NEAR(esnr(stats(0, 0, k * s), stats(0, n)), base + 20.0 * std::log10(k), 1e-9);
  }
}

TEST(Esnr, WireFrameMatchesRawSamples) {
  const PhantomDef p = make_wire_phantom(default_wire_depths());
  const RFFrame f = synthesize_frame(p, high_frequency_preset(), ProbeGeometry{}, 0.01, 4);
  const auto sig = f.data.block(200, 500, 36, 300);
  const auto noise = f.data.block(0, 2300, 436, 298);
  double peak = 0.0, sum = 0.0, sq = 0.0;
  for (Eigen::Index i = 0; i < sig.rows(); ++i)
    for (Eigen::Index j = 0; j < sig.cols(); ++j) peak = std::max(peak, std::abs(sig(i, j)));
  for (Eigen::Index i = 0; i < noise.rows(); ++i)
    for (Eigen::Index j = 0; j < noise.cols(); ++j) sum += noise(i, j);
  const double mean = sum / static_cast<double>(noise.size());
  for (Eigen::Index i = 0; i < noise.rows(); ++i)
    for (Eigen::Index j = 0; j < noise.cols(); ++j) sq += (noise(i, j) - mean) * (noise(i, j) - mean);
  const double expected = 20.0 * std::log10(peak / std::sqrt(sq / static_cast<double>(noise.size())));
  const Eigen::MatrixXd magnitude = sig.cwiseAbs();
  EXPECT_NEAR(esnr(region_stats(magnitude), region_stats(noise)), expected, 1e-9 * expected);
  EXPECT_GT(expected, 20.0);
}

TEST(Cnr, ExamplesAndSymmetry) {
  EXPECT_NEAR(cnr(stats(10, 1), stats(0, 1)), 10.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cnr(stats(10, 1), stats(0, 1)), 7.0711, 1e-4);
  EXPECT_EQ(cnr(stats(3, 1), stats(3, 2)), 0.0);
  EXPECT_EQ(cnr(stats(2, 0.5), stats(7, 3)), cnr(stats(7, 3), stats(2, 0.5)));
  EXPECT_THROW(cnr(stats(1, 0), stats(2, 0)), UndefinedMetric);
}

TEST(Ssnr, Examples) {
  EXPECT_DOUBLE_EQ(ssnr(stats(4, 2)), 2.0);
  EXPECT_THROW(ssnr(stats(4, 0)), UndefinedMetric);
  EXPECT_THROW(region_stats(std::span<const double>{}), DataError);
}

TEST(Ssnr, RayleighSamplesApproachTheoreticalRatio) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  std::vector<double> v(1000000);
  for (auto& x : v) x = std::hypot(g(rng), g(rng));
  const double expected = std::sqrt(std::numbers::pi / (4.0 - std::numbers::pi));
  EXPECT_NEAR(expected, 1.913, 1e-3);
  const double s = ssnr(region_stats(std::span<const double>(v)));
  EXPECT_NEAR(s, expected, 0.01);
  for (auto& x : v) x *= 37.5;
  EXPECT_NEAR(ssnr(region_stats(std::span<const double>(v))), s, 1e-9);
}

TEST(Ssim, IdentityAndSymmetry) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = random_image(rng, 32, 24), y = random_image(rng, 32, 24);
    EXPECT_NEAR(ssim(x, x), 1.0, 1e-9);
    EXPECT_NEAR(ssim(x, x, SSIMParams::global()), 1.0, 1e-9);
    EXPECT_NEAR(ssim(x, y), ssim(y, x), 1e-12);
    EXPECT_NEAR(ssim(x, y, SSIMParams::global()), ssim(y, x, SSIMParams::global()), 1e-12);
  }
}

TEST(Ssim, ConstantImagesGlobal) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(10, 10, 100.0);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(10, 10, 50.0);
  const double c1 = 6.5025;
  EXPECT_NEAR(ssim(a, b, SSIMParams::global()), (2.0 * 5000.0 + c1) / (100.0 * 100.0 + 50.0 * 50.0 + c1), 1e-12);
  EXPECT_NEAR(ssim(a, b, SSIMParams::global()), 0.8001, 1e-4);
  EXPECT_NEAR(ssim(a, b), ssim(a, b, SSIMParams::global()), 1e-12);
}

TEST(Ssim, StaysWithinUnitRange) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd x = random_image(rng, 16, 16);
    const Eigen::MatrixXd y = t % 2 ? Eigen::MatrixXd(255.0 - x.array()) : random_image(rng, 16, 16);
    for (const auto& p : {SSIMParams{}, SSIMParams{255.0, 3}, SSIMParams::global()}) {
      const double s = ssim(x, y, p);
      EXPECT_GE(s, -1.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(Ssim, Errors) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, 8), b = Eigen::MatrixXd::Zero(8, 9);
  EXPECT_THROW(ssim(a, b), DimensionMismatch);
  EXPECT_THROW(ssim(a, a, SSIMParams{255.0, 4}), ConfigError);
  EXPECT_THROW(ssim(a, a, SSIMParams{255.0, 9}), DimensionMismatch);
  EXPECT_THROW(ssim(a, a, SSIMParams{0.0, 7}), ConfigError);
}

TEST(Psnr, IdenticalImagesAreFlaggedInfinite) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(4, 4, 12.0);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(rmse(a, a), 0.0);
  const PsnrResult r = psnr(a, a);
  EXPECT_TRUE(r.infinite);
  EXPECT_TRUE(std::isinf(r.db));
}

TEST(Psnr, FullScaleDifference) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5), b = Eigen::MatrixXd::Constant(5, 5, 255.0);
  EXPECT_DOUBLE_EQ(mse(a, b), 255.0 * 255.0);
  EXPECT_DOUBLE_EQ(rmse(a, b), 255.0);
  EXPECT_DOUBLE_EQ(psnr(a, b).db, 0.0);
  EXPECT_FALSE(psnr(a, b).infinite);
}

TEST(Psnr, RmseIdentity) {
  EXPECT_NEAR(20.0 * std::log10(255.0), 48.1308, 5e-5);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const Eigen::MatrixXd x = random_image(rng, 12, 9), y = random_image(rng, 12, 9);
    EXPECT_NEAR(psnr(x, y).db + 20.0 * std::log10(rmse(x, y)), 20.0 * std::log10(255.0), 1e-9);
    // common gain leaves PSNR unchanged only when the peak scales too
    EXPECT_NEAR(psnr(2.0 * x, 2.0 * y, 510.0).db, psnr(x, y).db, 1e-9);
  }
}

TEST(Psnr, ObservedMaxMode) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 2), x = Eigen::MatrixXd::Zero(2, 2);
  y(0, 0) = 100.0;
  x(0, 0) = 90.0;  // mse 25
  EXPECT_NEAR(psnr(x, y, 255.0, PeakMode::ObservedMax).db, 20.0 * std::log10(100.0 / 5.0), 1e-12);
  EXPECT_NEAR(psnr(x, y).db, 20.0 * std::log10(255.0 / 5.0), 1e-12);
}

TEST(Scores, Aggregates) {
  std::vector<PairScore> pairs{{"a", 0.5, {20.0, false}, 2.0}, {"b", 0.7, {30.0, false}, 4.0}};
  ScoreReport r = aggregate_scores(pairs);
  EXPECT_DOUBLE_EQ(r.ssim.mean, 0.6);
  EXPECT_NEAR(r.ssim.std, 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(r.psnr.mean, 25.0);
  EXPECT_DOUBLE_EQ(r.rmse.std, 1.0);
  EXPECT_FALSE(r.psnr.infinite);
  pairs.push_back({"c", 1.0, {std::numeric_limits<double>::infinity(), true}, 0.0});
  r = aggregate_scores(pairs);
  EXPECT_TRUE(r.psnr.infinite);
  EXPECT_EQ(r.pairs.size(), 3u);
}

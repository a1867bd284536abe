#pragma once

// Image-quality measures: FWHM resolution, eSNR, CNR, SSNR, SSIM, MSE, PSNR,
// RMSE. Region statistics use population moments (divide by N).

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eustwin/error.hpp"

namespace eustwin {

struct RegionStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

RegionStats region_stats(std::span<const double> samples);

template <typename Derived>
RegionStats region_stats(const Eigen::DenseBase<Derived>& samples) {
  const Eigen::Matrix<double, Eigen::Dynamic, 1> flat =
      samples.derived().template cast<double>().reshaped();
  return region_stats(std::span<const double>(flat.data(), static_cast<std::size_t>(flat.size())));
}

/// Width between the half-maximum crossings nearest the global peak, each
/// located by linear interpolation. Throws BoundaryError when either side never
/// drops below half maximum.
double fwhm(std::span<const double> profile, double spacing);

/// 20 log10(max(signal) / std(noise)), dB.
double esnr(const RegionStats& signal, const RegionStats& noise);

/// |mu_T - mu_B| / sqrt(sigma_T^2 + sigma_B^2).
double cnr(const RegionStats& target, const RegionStats& background);

/// mu / sigma of a speckle region.
double ssnr(const RegionStats& speckle);

struct SSIMParams {
  double L = 255.0;
  int window = 7;  // odd side length; 0 selects whole-image statistics

  static SSIMParams global(double L = 255.0) { return SSIMParams{L, 0}; }
  bool is_global() const { return window == 0; }
  double c1() const { return (0.01 * L) * (0.01 * L); }
  double c2() const { return (0.03 * L) * (0.03 * L); }
  void validate() const;
};

namespace detail {

inline double ssim_term(double mx, double my, double vx, double vy, double cxy, double c1, double c2) {
  return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

// Sum over every w x w window (valid positions only).
template <typename Derived>
Eigen::MatrixXd box_sum(const Eigen::MatrixBase<Derived>& a, Eigen::Index w) {
  const Eigen::Index rows = a.rows() - w + 1, cols = a.cols() - w + 1;
  Eigen::MatrixXd horizontal = Eigen::MatrixXd::Zero(a.rows(), cols);
  for (Eigen::Index k = 0; k < w; ++k) horizontal += a.middleCols(k, cols);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index k = 0; k < w; ++k) out += horizontal.middleRows(k, rows);
  return out;
}

inline void require_same_shape(Eigen::Index r1, Eigen::Index c1, Eigen::Index r2, Eigen::Index c2) {
  if (r1 != r2 || c1 != c2) throw DimensionMismatch("images must have identical dimensions");
  if (r1 == 0 || c1 == 0) throw DimensionMismatch("images must not be empty");
}

}  // namespace detail

/// Structural similarity. Windowed mode averages the per-window index over
/// every valid position of a uniform window; global mode evaluates it once on
/// whole-image statistics.
template <typename DerivedX, typename DerivedY>
double ssim(const Eigen::MatrixBase<DerivedX>& x_in, const Eigen::MatrixBase<DerivedY>& y_in,
            const SSIMParams& params = {}) {
  params.validate();
  detail::require_same_shape(x_in.rows(), x_in.cols(), y_in.rows(), y_in.cols());
  const Eigen::MatrixXd x = x_in.template cast<double>();
  const Eigen::MatrixXd y = y_in.template cast<double>();
  const double c1 = params.c1(), c2 = params.c2();

  // Second moments on mean-removed data keep the cancellation small.
  const double gx = x.mean(), gy = y.mean();
  const Eigen::MatrixXd dx = x.array() - gx;
  const Eigen::MatrixXd dy = y.array() - gy;

  if (params.is_global()) {
    const double n = static_cast<double>(x.size());
    const double vx = dx.squaredNorm() / n;
    const double vy = dy.squaredNorm() / n;
    const double cxy = dx.cwiseProduct(dy).sum() / n;
    return detail::ssim_term(gx, gy, vx, vy, cxy, c1, c2);
  }

  const Eigen::Index w = params.window;
  if (w > x.rows() || w > x.cols()) throw DimensionMismatch("SSIM window larger than the image");
  const double n = static_cast<double>(w * w);
  const Eigen::ArrayXXd sx = detail::box_sum(dx, w).array() / n;
  const Eigen::ArrayXXd sy = detail::box_sum(dy, w).array() / n;
  const Eigen::ArrayXXd sxx = detail::box_sum(dx.cwiseProduct(dx), w).array() / n;
  const Eigen::ArrayXXd syy = detail::box_sum(dy.cwiseProduct(dy), w).array() / n;
  const Eigen::ArrayXXd sxy = detail::box_sum(dx.cwiseProduct(dy), w).array() / n;

  const Eigen::ArrayXXd mx = sx + gx, my = sy + gy;
  const Eigen::ArrayXXd vx = (sxx - sx.square()).max(0.0);
  const Eigen::ArrayXXd vy = (syy - sy.square()).max(0.0);
  const Eigen::ArrayXXd cxy = sxy - sx * sy;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                              ((mx.square() + my.square() + c1) * (vx + vy + c2));
  return map.mean();
}

/// Mean squared pixel difference.
template <typename DerivedX, typename DerivedY>
double mse(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  detail::require_same_shape(x.rows(), x.cols(), y.rows(), y.cols());
  return (x.template cast<double>() - y.template cast<double>()).squaredNorm() /
         static_cast<double>(x.size());
}

template <typename DerivedX, typename DerivedY>
double rmse(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  return std::sqrt(mse(x, y));
}

// Peak used in the PSNR numerator.
enum class PeakMode {
  Ceiling,      // the dynamic-range ceiling L
  ObservedMax,  // the maximum of the reference image
};

struct PsnrResult {
  double db = 0.0;
  bool infinite = false;  // identical images; db holds +inf
};

/// 20 log10(peak / sqrt(mse)); x is the generated image, y the reference.
template <typename DerivedX, typename DerivedY>
PsnrResult psnr(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                double L = 255.0, PeakMode mode = PeakMode::Ceiling) {
  const double e = mse(x, y);
  if (e == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double peak = mode == PeakMode::Ceiling ? L : static_cast<double>(y.maxCoeff());
  return {20.0 * std::log10(peak / std::sqrt(e)), false};
}

// ---------------------------------------------------------------------------
// Reports

struct PairScore {
  std::string name;
  double ssim = 0.0;
  PsnrResult psnr;
  double rmse = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
  bool infinite = false;
};

struct ScoreReport {
  std::vector<PairScore> pairs;
  Aggregate ssim, psnr, rmse;
};

/// Mean/std of every column; PSNR is flagged infinite if any entry is.
ScoreReport aggregate_scores(std::vector<PairScore> pairs);

struct TargetMetrics {
  std::string label;
  std::optional<double> lateral_fwhm;  // m
  std::optional<double> axial_fwhm;    // m
  std::optional<double> esnr_db;
};

struct ImageMetrics {
  std::string transducer_id;
  std::vector<TargetMetrics> targets;
  std::optional<double> lateral_fwhm;  // m, of the resolution target
  std::optional<double> axial_fwhm;
  std::optional<double> cnr;
  std::optional<double> ssnr;
};

}  // namespace eustwin

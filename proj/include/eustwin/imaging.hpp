#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "eustwin/error.hpp"
#include "eustwin/scanner.hpp"

namespace eustwin {

// Depth rows x scanline columns.
using Image = Eigen::MatrixXd;

inline constexpr Eigen::Index kDatasetWidth = 436;
inline constexpr Eigen::Index kDatasetHeight = 1000;

struct BModeMeta {
  double dynamic_range = 50.0;  // dB
  double ceiling = 255.0;       // L
  double depth = 0.02;          // m
  double start_range = kDefaultStartRange;
  double roi_center = 180.0;    // deg
  double roi_span = 106.0;      // deg
  std::string transducer_id;
  std::uint64_t seed = 0;

  bool same_geometry(const BModeMeta& other) const {
    return depth == other.depth && start_range == other.start_range &&
           roi_center == other.roi_center && roi_span == other.roi_span;
  }
};

struct BModeImage {
  Image pixels;  // values in [0, meta.ceiling]
  BModeMeta meta;

  Eigen::Index width() const { return pixels.cols(); }
  Eigen::Index height() const { return pixels.rows(); }
};

struct ImagePair {
  BModeImage low;
  BModeImage high;

  /// Throws DimensionMismatch / DataError unless the two images share
  /// dimensions and scan geometry.
  void validate() const;
};

/// Magnitude of the analytic signal (FFT Hilbert transform on a zero-padded
/// copy of the line).
Eigen::VectorXd envelope(const Eigen::Ref<const Eigen::VectorXd>& rf_line);

/// Envelope of every line of the frame; same shape as frame.data.
RFMatrix envelope_frame(const RFFrame& frame);

/// pixel = L clamp(1 + 20 log10(e / e_max) / DR, 0, 1). An all-zero input
/// yields an all-zero output.
template <typename Derived>
typename Derived::PlainObject log_compress(const Eigen::MatrixBase<Derived>& envelope, double dynamic_range, double ceiling = 255.0) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  if (!(dynamic_range > 0.0)) throw ConfigError("dynamic_range must be > 0");
  if ((envelope.array() < Scalar(0)).any()) throw DataError("envelope must be non-negative");
  const Scalar peak = envelope.size() > 0 ? envelope.maxCoeff() : Scalar(0);
  if (peak <= Scalar(0)) return Plain::Zero(envelope.rows(), envelope.cols());
  return Plain(envelope.unaryExpr([=](Scalar e) -> Scalar {
    if (e <= Scalar(0)) return Scalar(0);
    const double level = 1.0 + 20.0 * std::log10(static_cast<double>(e / peak)) / dynamic_range;
    return static_cast<Scalar>(ceiling * std::clamp(level, 0.0, 1.0));
  }));
}

/// Linear interpolation of `line` onto `rows` points; first and last samples
/// map onto the first and last rows.
Eigen::VectorXd resample_linear(const Eigen::Ref<const Eigen::VectorXd>& line, Eigen::Index rows);

/// Envelope, axial resampling to `rows` and log compression.
BModeImage to_dataset_image(const RFFrame& frame, double dynamic_range, double ceiling = 255.0,
                            Eigen::Index rows = kDatasetHeight);

ImagePair to_image_pair(const PairedRFFrame& pair, double dynamic_range, double ceiling = 255.0);

struct ScanConvertOptions {
  double pixel_size = 2e-5;  // m
};

// Cartesian fan raster. Pixel (r, c) is centered at (x_min + c h, z_min + r h).
struct CartesianRaster {
  Image pixels;
  double x_min = 0.0;
  double z_min = 0.0;
  double pixel_size = 0.0;
  double start_range = 0.0;
  double end_range = 0.0;
  double roi_center = 0.0;
  double roi_span = 0.0;
  Eigen::Index source_cols = 0;
  Eigen::Index source_rows = 0;

  Point pixel_center(Eigen::Index row, Eigen::Index col) const {
    return Point(x_min + static_cast<double>(col) * pixel_size,
                 z_min + static_cast<double>(row) * pixel_size);
  }
  /// Fractional (column, row) in the source scanline grid, or nothing when
  /// the point lies outside the fan.
  std::optional<Eigen::Vector2d> to_grid(const Point& p) const;
  /// Image-plane point of a fractional source grid position.
  Point from_grid(double col, double row) const;
};

/// Polar (angle, range) grid to Cartesian, bilinear; zero outside the fan.
CartesianRaster scan_convert(const BModeImage& image, const ScanConvertOptions& options = {});

/// Binary 8-bit PGM (P5). Pixels are scaled by 255 / ceiling and rounded.
void write_pgm(const std::filesystem::path& path, const Image& pixels, double ceiling = 255.0);
Image read_pgm(const std::filesystem::path& path);

/// `<stem>.pgm` plus the `<stem>.json` metadata sidecar.
void write_bmode(const std::filesystem::path& pgm_path, const BModeImage& image);
BModeImage read_bmode(const std::filesystem::path& pgm_path);

}  // namespace eustwin

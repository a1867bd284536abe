#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eustwin/acoustics.hpp"
#include "eustwin/phantom.hpp"
#include "eustwin/random.hpp"

namespace eustwin {

// Lines x samples, each scanline contiguous.
using RFMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ProbeGeometry {
  double reflector_angle = 45.0;   // deg
  double roi_center = 180.0;       // deg, opposite the thick pillar
  double roi_span = 106.0;         // deg
  int scanlines_per_frame = 436;
  double rf_sample_rate = 100e6;   // Hz
  double depth = 0.02;             // m, imaged range extent
  double start_range = kDefaultStartRange;  // m from the rotation center
  double rotation_speed = 1293.1;  // rpm
  double phase_offset = 180.0;     // deg between the two elements
  std::vector<double> pillar_angles{0.0, 90.0, 270.0};
  double pillar_radius = 0.007;    // m

  void validate() const;

  double frame_rate() const { return rotation_speed / 60.0; }
  double roi_start() const { return roi_center - roi_span / 2.0; }
  /// ceil(2 depth / c * rate)
  Eigen::Index rf_samples_per_line(double sound_speed) const;
  /// Angle of line k relative to roi_start, radians.
  double line_offset(int k) const;
  bool operator==(const ProbeGeometry&) const = default;
};

struct ScanlineRay {
  int index = 0;
  double angle = 0.0;  // deg, absolute rotational angle
  Point origin = Point::Zero();

  /// Unit direction in the image plane; angle 180 deg points along +z.
  Point direction() const;
};

/// scanlines_per_frame angles spanning roi_span, centered on roi_center.
std::vector<double> scanline_angles(const ProbeGeometry& geometry);
std::vector<ScanlineRay> scanline_rays(const ProbeGeometry& geometry);

struct RFFrame {
  std::string transducer_id;
  RFMatrix data;  // scanlines x samples, linear amplitude
  double sample_rate = 0.0;
  double sound_speed = 1540.0;
  ProbeGeometry geometry;

  double line_angle(int k) const;
  /// Range from the rotation center of RF sample i.
  double sample_range(double i) const { return geometry.start_range + i * sound_speed / (2.0 * sample_rate); }
  double sample_spacing() const { return sound_speed / (2.0 * sample_rate); }
};

struct Alignment {
  std::vector<double> line_angles;  // shared by both frames
  double low_mount_phase = 0.0;     // deg
  double high_mount_phase = 180.0;  // deg
};

struct PairedRFFrame {
  RFFrame low;
  RFFrame high;
  Alignment alignment;

  /// Throws DataError unless both frames cover the recorded angles in order.
  void verify_alignment() const;
};

/// One RF line: superposed pulse echoes of every scatterer within 3 lateral
/// FWHM of the ray, plus white Gaussian noise drawn from `rng`.
Eigen::VectorXd synthesize_rf_line(const PhantomDef& phantom, const TransducerSpec& spec,
                                   const ScanlineRay& ray, const ProbeGeometry& geometry,
                                   double noise_sigma, Engine& rng);

/// All lines of a frame. Line k's noise comes from the substream
/// ("rf-noise/<mount>", k) of `seed`, so the result equals calling
/// synthesize_rf_line with that engine for every ray.
RFFrame synthesize_frame(const PhantomDef& phantom, const TransducerSpec& spec,
                         const ProbeGeometry& geometry, double noise_sigma, std::uint64_t seed);

/// Engine used for the noise of line `line` of a frame from `spec`.
Engine line_noise_engine(std::uint64_t seed, const TransducerSpec& spec, int line);

/// Aligned low/high frames. The low element must be top mounted and the high
/// element bottom mounted; the 180 deg mechanical offset is compensated so both
/// frames share line angles and index order.
PairedRFFrame simulate_pair(const PhantomDef& phantom, const ProbeGeometry& geometry,
                            const TransducerSpec& low_spec, const TransducerSpec& high_spec,
                            double noise_sigma, std::uint64_t seed);

/// Binary RF frame, little endian (docs/formats.md).
void write_rf_frame(const std::filesystem::path& path, const RFFrame& frame);
RFFrame read_rf_frame(const std::filesystem::path& path);

}  // namespace eustwin

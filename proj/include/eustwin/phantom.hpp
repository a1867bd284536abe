#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "eustwin/acoustics.hpp"

namespace eustwin {

// Image-plane coordinates: x lateral, z along the mid-ROI ray, origin at the
// probe (rotation) center. Meters.
using Point = Eigen::Vector2d;

struct Rect {
  double x_min = 0.0, x_max = 0.0, z_min = 0.0, z_max = 0.0;

  bool contains(const Point& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= z_min && p.y() <= z_max;
  }
  double area() const { return (x_max - x_min) * (z_max - z_min); }
  bool operator==(const Rect&) const = default;
};

struct Circle {
  Point center = Point::Zero();
  double radius = 0.0;

  bool contains(const Point& p) const { return (p - center).squaredNorm() <= radius * radius; }
  bool operator==(const Circle&) const = default;
};

using AnechoicRegion = std::variant<Circle, Rect>;

bool region_contains(const AnechoicRegion& region, const Point& p);

struct Scatterer {
  Point position = Point::Zero();
  double reflectivity = 0.0;
  bool operator==(const Scatterer&) const = default;
};

struct WireTarget {
  Point center = Point::Zero();
  double diameter = 100e-6;
  double reflectivity = 0.0;
  bool operator==(const WireTarget&) const = default;
};

// Cylinder seen end-on; only the face toward the probe echoes.
struct PillarTarget {
  Point center = Point::Zero();
  double diameter = 4e-3;
  double reflectivity = 0.0;
  bool operator==(const PillarTarget&) const = default;
};

struct PhantomDef {
  std::vector<Scatterer> scatterers;
  std::vector<WireTarget> wires;
  std::vector<PillarTarget> pillars;
  Medium medium = water_medium();
  Rect bounds;
  std::vector<AnechoicRegion> anechoic_regions;
  std::uint64_t seed = 0;

  /// Throws ConfigError if a target leaves the bounds, DataError if a scatterer
  /// sits inside an anechoic region.
  void validate() const;

  bool empty() const { return scatterers.empty() && wires.empty() && pillars.empty(); }

  /// Everything that echoes, flattened to point scatterers: diffuse scatterers,
  /// wires as single points, pillar front faces as dense arcs.
  std::vector<Scatterer> point_scatterers() const;

  bool operator==(const PhantomDef&) const = default;
};

/// Window 2-22 mm from the probe center over the 106 deg ROI, as a bounding box.
Rect default_bounds();

/// Radius at which the imaging window starts.
inline constexpr double kDefaultStartRange = 2e-3;

/// Mean |reflectivity| of the diffuse scatterers (half-normal, unit sigma).
double diffuse_mean_reflectivity();

/// Point targets sit 40 dB above the diffuse mean.
double target_reflectivity();

struct WirePhantomOptions {
  Medium medium = water_medium();
  Rect bounds = default_bounds();
  double start_range = kDefaultStartRange;
};

/// Default depths 5, 10, 15 mm below the window start.
std::vector<double> default_wire_depths();

/// 100 um wires on the mid-ROI ray at the given depths (measured from the window
/// start). Depths must be strictly increasing and inside the bounds.
PhantomDef make_wire_phantom(const std::vector<double>& wire_depths,
                             const WirePhantomOptions& options = {});

struct TissuePhantomOptions {
  Medium medium = tissue_medium();
  Rect bounds = default_bounds();
  std::vector<AnechoicRegion> anechoic_regions;
  TransducerSpec reference = high_frequency_preset();
};

/// Number of diffuse scatterers for `density` scatterers per resolution cell
/// of the reference transducer over the phantom bounds.
std::size_t tissue_scatterer_count(double density, const TissuePhantomOptions& options);

/// Uniformly placed scatterers with half-normal reflectivities; scatterers
/// drawn inside anechoic regions are discarded.
PhantomDef make_tissue_phantom(double scatterers_per_res_cell, std::uint64_t seed,
                               const TissuePhantomOptions& options = {});

enum class RegionKind { Target, Background, Homogeneous, Speckle, Noise };

// `image` rectangles are (column = scanline, row = depth pixel); `rf`
// rectangles are (column = scanline, row = RF sample).
enum class RegionSpace { Image, RF };

struct PixelRect {
  long col = 0, row = 0, width = 0, height = 0;
};

struct RegionSpec {
  RegionKind kind = RegionKind::Target;
  PixelRect rect;
  RegionSpace space = RegionSpace::Image;
  std::string label;
};

std::string to_string(RegionKind kind);
RegionKind region_kind_from_string(const std::string& s);

/// Clip `rect` to a rows x cols grid. Throws ConfigError on a degenerate
/// rectangle, DataError on an empty intersection.
PixelRect clip_region(const PixelRect& rect, long cols, long rows);

/// Pixels inside `region`, row-major, clipped to the image.
template <typename Derived>
std::vector<double> region_pixels(const Eigen::DenseBase<Derived>& image, const RegionSpec& region) {
  const PixelRect r = clip_region(region.rect, image.cols(), image.rows());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(r.width * r.height));
  for (long row = r.row; row < r.row + r.height; ++row)
    for (long col = r.col; col < r.col + r.width; ++col) out.push_back(image(row, col));
  return out;
}

std::vector<RegionSpec> read_regions(const std::filesystem::path& path);
void write_regions(const std::filesystem::path& path, const std::vector<RegionSpec>& regions);

/// Phantom document, format "eustwin-phantom" version 1 (see docs/formats.md).
std::string phantom_to_json(const PhantomDef& phantom);
PhantomDef phantom_from_json(const std::string& text);
void write_phantom(const std::filesystem::path& path, const PhantomDef& phantom);
PhantomDef read_phantom(const std::filesystem::path& path);

}  // namespace eustwin

#include "eustwin/evaluate.hpp"

#include <cmath>
#include <numbers>

#include "eustwin/error.hpp"

namespace eustwin {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double line_step(const ProbeGeometry& g) {
  return g.roi_span / (g.scanlines_per_frame - 1) * kDeg;
}

template <typename Pred>
const RegionSpec* first_of(const std::vector<RegionSpec>& regions, Pred pred) {
  for (const auto& r : regions)
    if (pred(r)) return &r;
  return nullptr;
}

const RegionSpec* first_kind(const std::vector<RegionSpec>& regions, RegionKind kind) {
  return first_of(regions, [&](const RegionSpec& r) { return r.kind == kind; });
}

RegionStats image_stats(const Image& bmode, const RegionSpec& region, Eigen::Index samples) {
  RegionSpec r = region;
  r.rect = to_image_rect(region, samples, bmode.rows());
  r.space = RegionSpace::Image;
  const auto px = region_pixels(bmode, r);
  return region_stats(std::span<const double>(px));
}

std::string name_of(const RegionSpec& r, std::size_t index) {
  return r.label.empty() ? to_string(r.kind) + std::to_string(index) : r.label;
}

TargetMetrics measure_target(const RFFrame& rf, const RFMatrix& env, const RegionSpec& region,
                             const std::string& label, const std::optional<RegionStats>& noise) {
  const PixelRect r = clip_region(region.rect, rf.data.rows(), rf.data.cols());
  const auto box = env.block(r.col, r.row, r.width, r.height);
  Eigen::Index li = 0, si = 0;
  box.maxCoeff(&li, &si);
  const Eigen::Index line = r.col + li, sample = r.row + si;

  TargetMetrics t;
  t.label = label;
  try {
    const Eigen::VectorXd lateral = env.block(r.col, sample, r.width, 1);
    const double arc = rf.sample_range(static_cast<double>(sample)) * line_step(rf.geometry);
    t.lateral_fwhm = fwhm(std::span<const double>(lateral.data(), lateral.size()), arc);
    const Eigen::VectorXd axial = env.row(line).segment(r.row, r.height).transpose();
    t.axial_fwhm = fwhm(std::span<const double>(axial.data(), axial.size()), rf.sample_spacing());
  } catch (const BoundaryError& e) {
    throw BoundaryError("target '" + label + "': " + e.what());
  }
  if (noise) {
    const RFMatrix magnitude = rf.data.block(r.col, r.row, r.width, r.height).cwiseAbs();
    t.esnr_db = esnr(region_stats(magnitude), *noise);
  }
  return t;
}

}  // namespace

Eigen::Vector2d rf_grid_position(const RFFrame& frame, const Point& p) {
  const double range = p.norm();
  const double angle = std::atan2(-p.x(), -p.y());
  const double offset = std::remainder(angle - frame.geometry.roi_start() * kDeg, 2.0 * std::numbers::pi);
  return {offset / line_step(frame.geometry),
          (range - frame.geometry.start_range) / frame.sample_spacing()};
}

PixelRect to_rf_rect(const RegionSpec& region, Eigen::Index samples, Eigen::Index image_rows) {
  if (region.space == RegionSpace::RF) return region.rect;
  const double scale = static_cast<double>(samples - 1) / static_cast<double>(image_rows - 1);
  PixelRect r = region.rect;
  const auto first = static_cast<long>(std::floor(static_cast<double>(r.row) * scale));
  const auto last = static_cast<long>(std::ceil(static_cast<double>(r.row + r.height - 1) * scale));
  r.row = first;
  r.height = last - first + 1;
  return r;
}

PixelRect to_image_rect(const RegionSpec& region, Eigen::Index samples, Eigen::Index image_rows) {
  if (region.space == RegionSpace::Image) return region.rect;
  const double scale = static_cast<double>(image_rows - 1) / static_cast<double>(samples - 1);
  PixelRect r = region.rect;
  const auto first = static_cast<long>(std::ceil(static_cast<double>(r.row) * scale));
  const auto last = static_cast<long>(std::floor(static_cast<double>(r.row + r.height - 1) * scale));
  r.row = first;
  r.height = std::max(last - first + 1, 1L);
  return r;
}

void require_region_kinds(const std::vector<RegionSpec>& regions) {
  const bool target = first_kind(regions, RegionKind::Target);
  const bool homogeneous = first_kind(regions, RegionKind::Homogeneous);
  const bool background = first_kind(regions, RegionKind::Background);
  const bool speckle = first_kind(regions, RegionKind::Speckle);
  if (homogeneous != background)
    throw ConfigError(std::string("regions: CNR needs both homogeneous and background regions; missing ") +
                      (homogeneous ? "background" : "homogeneous"));
  if (!target && !homogeneous && !speckle)
    throw ConfigError(
        "regions: nothing to measure; required kinds: target (resolution, eSNR with a noise region), "
        "homogeneous + background (CNR), speckle (SSNR)");
}

ImageMetrics evaluate_frame(const RFFrame& rf, const Image& bmode,
                            const std::vector<RegionSpec>& regions) {
  if (bmode.cols() != rf.data.rows())
    throw DimensionMismatch("B-mode image and RF frame disagree on the number of scanlines");
  require_region_kinds(regions);
  const Eigen::Index samples = rf.data.cols();

  ImageMetrics m;
  m.transducer_id = rf.transducer_id;

  std::optional<RegionStats> noise;
  if (const RegionSpec* n = first_kind(regions, RegionKind::Noise)) {
    const PixelRect r = clip_region(to_rf_rect(*n, samples, bmode.rows()), rf.data.rows(), samples);
    noise = region_stats(rf.data.block(r.col, r.row, r.width, r.height));
  }

  const RFMatrix env = envelope_frame(rf);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].kind != RegionKind::Target) continue;
    RegionSpec region = regions[i];
    region.rect = to_rf_rect(region, samples, bmode.rows());
    region.space = RegionSpace::RF;
    m.targets.push_back(measure_target(rf, env, region, name_of(regions[i], i), noise));
  }
  if (!m.targets.empty()) {
    m.lateral_fwhm = m.targets.front().lateral_fwhm;
    m.axial_fwhm = m.targets.front().axial_fwhm;
  }

  const RegionSpec* homogeneous = first_kind(regions, RegionKind::Homogeneous);
  const RegionSpec* background = first_kind(regions, RegionKind::Background);
  if (homogeneous && background)
    m.cnr = cnr(image_stats(bmode, *homogeneous, samples), image_stats(bmode, *background, samples));
  if (const RegionSpec* s = first_kind(regions, RegionKind::Speckle))
    m.ssnr = ssnr(image_stats(bmode, *s, samples));
  return m;
}

std::vector<RegionSpec> suggest_regions(const PhantomDef& phantom, const RunConfig& config) {
  const ProbeGeometry& g = config.geometry;
  RFFrame grid;
  grid.geometry = g;
  grid.sample_rate = g.rf_sample_rate;
  grid.sound_speed = phantom.medium.sound_speed;
  const long lines = g.scanlines_per_frame;
  const long samples = g.rf_samples_per_line(phantom.medium.sound_speed);
  const double step = line_step(g);
  const double spacing = grid.sample_spacing();

  auto box = [&](RegionKind kind, double line, double sample, long half_lines, long half_samples,
                 std::string label) {
    const PixelRect rect{std::lround(line) - half_lines, std::lround(sample) - half_samples,
                         2 * half_lines + 1, 2 * half_samples + 1};
    return RegionSpec{kind, clip_region(rect, lines, samples), RegionSpace::RF, std::move(label)};
  };

  std::vector<RegionSpec> regions;
  if (!phantom.wires.empty()) {
    double first = static_cast<double>(samples), last = 0.0;
    for (std::size_t i = 0; i < phantom.wires.size(); ++i) {
      const Point c = phantom.wires[i].center;
      const Eigen::Vector2d at = rf_grid_position(grid, c);
      const double range = c.norm();
      const double beam = std::max(lateral_beam_fwhm(config.low, range, phantom.medium),
                                   lateral_beam_fwhm(config.high, range, phantom.medium));
      const long half_lines = static_cast<long>(std::ceil(1.5 * beam / (range * step)));
      double gap = 1e-3;
      for (std::size_t j = 0; j < phantom.wires.size(); ++j)
        if (j != i) gap = std::min(gap, 0.45 * (phantom.wires[j].center - c).norm());
      const long half_samples = static_cast<long>(std::floor(gap / spacing));
      regions.push_back(box(RegionKind::Target, at.x(), at.y(), half_lines, half_samples,
                            "wire" + std::to_string(i + 1)));
      first = std::min(first, at.y());
      last = std::max(last, at.y());
    }
    // Echo-free depth band: wire echoes span well under 1 mm of range.
    const double margin = 1e-3 / spacing;
    const long above = static_cast<long>(std::floor(first - margin));
    const long below = static_cast<long>(std::ceil(last + margin));
    if (samples - below >= above && samples - below >= 16)
      regions.push_back({RegionKind::Noise, {0, below, lines, samples - below}, RegionSpace::RF, "noise"});
    else if (above >= 16)
      regions.push_back({RegionKind::Noise, {0, 0, lines, above}, RegionSpace::RF, "noise"});
    return regions;
  }

  const Circle* cyst = nullptr;
  for (const auto& a : phantom.anechoic_regions)
    if ((cyst = std::get_if<Circle>(&a))) break;
  if (cyst) {
    const Eigen::Vector2d at = rf_grid_position(grid, cyst->center);
    const double range = cyst->center.norm();
    const double half = 0.8 * cyst->radius / std::sqrt(2.0);
    const long half_lines = static_cast<long>(std::floor(half / (range * step)));
    const long half_samples = static_cast<long>(std::floor(half / spacing));
    const double shift = 3.0 * cyst->radius / (range * step);
    regions.push_back(box(RegionKind::Background, at.x(), at.y(), half_lines, half_samples, "cyst"));
    regions.push_back(box(RegionKind::Homogeneous, at.x() + shift, at.y(), half_lines, half_samples,
                          "beside cyst"));
    regions.push_back(box(RegionKind::Speckle, at.x() - shift, at.y(), half_lines, half_samples,
                          "speckle"));
    return regions;
  }
  regions.push_back({RegionKind::Speckle, {lines / 4, samples / 4, lines / 2, samples / 2},
                     RegionSpace::RF, "speckle"});
  return regions;
}

}  // namespace eustwin

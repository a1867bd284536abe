#pragma once

#include <vector>

#include "eustwin/config.hpp"
#include "eustwin/imaging.hpp"
#include "eustwin/metrics.hpp"
#include "eustwin/phantom.hpp"
#include "eustwin/scanner.hpp"

namespace eustwin {

/// Fractional (line, sample) of an image-plane point in the RF grid of `frame`.
Eigen::Vector2d rf_grid_position(const RFFrame& frame, const Point& p);

/// Region rectangle expressed in RF samples (rows) for a frame of `samples`
/// samples per line, given an image of `image_rows` rows.
PixelRect to_rf_rect(const RegionSpec& region, Eigen::Index samples, Eigen::Index image_rows);
PixelRect to_image_rect(const RegionSpec& region, Eigen::Index samples, Eigen::Index image_rows);

/// Throws ConfigError unless the regions allow at least one measurement; the
/// message lists the kinds that are needed.
void require_region_kinds(const std::vector<RegionSpec>& regions);

/// Resolution and eSNR per Target region (linear envelope, RF grid); CNR of the
/// first Homogeneous against the first Background region and SSNR of the first
/// Speckle region on the B-mode pixels.
ImageMetrics evaluate_frame(const RFFrame& rf, const Image& bmode,
                            const std::vector<RegionSpec>& regions);

/// Regions around the known structures of a phantom: a Target box per wire and
/// a Noise strip clear of every echo, or Background / Homogeneous / Speckle
/// boxes beside the first circular anechoic region. All boxes are in RF space.
std::vector<RegionSpec> suggest_regions(const PhantomDef& phantom, const RunConfig& config);

}  // namespace eustwin

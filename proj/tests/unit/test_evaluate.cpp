#include <gtest/gtest.h>

#include <cmath>

#include "eustwin/error.hpp"
#include "eustwin/evaluate.hpp"

using namespace eustwin;

namespace {

RFFrame grid_frame() {
  RFFrame f;
  f.sample_rate = 100e6;
  return f;
}

}  // namespace

TEST(RfGrid, RayPointsMapOntoTheirLine) {
  const RFFrame f = grid_frame();
  const auto rays = scanline_rays(f.geometry);
  for (int k : {0, 17, 217, 435}) {
    const Point p = (f.geometry.start_range + 0.01) * rays[static_cast<std::size_t>(k)].direction();
    const Eigen::Vector2d at = rf_grid_position(f, p);
    EXPECT_NEAR(at.x(), k, 1e-9);
    EXPECT_NEAR(at.y(), 0.01 / f.sample_spacing(), 1e-6);
  }
}

TEST(RfGrid, RectConversionsCoverTheSameDepths) {
  const RegionSpec image{RegionKind::Speckle, {10, 100, 20, 50}, RegionSpace::Image, ""};
  const PixelRect rf = to_rf_rect(image, 2598, 1000);
  EXPECT_EQ(rf.col, 10);
  EXPECT_EQ(rf.width, 20);
  EXPECT_LE(rf.row, std::lround(100 * 2597.0 / 999.0));
  EXPECT_GE(rf.row + rf.height - 1, std::lround(149 * 2597.0 / 999.0));
  const RegionSpec back{RegionKind::Speckle, rf, RegionSpace::RF, ""};
  const PixelRect img = to_image_rect(back, 2598, 1000);
  EXPECT_EQ(img.row, 100);
  EXPECT_EQ(img.height, 50);
}

TEST(Regions, RequiredKinds) {
  EXPECT_THROW(require_region_kinds({}), ConfigError);
  EXPECT_THROW(require_region_kinds({{RegionKind::Noise, {0, 0, 1, 1}}}), ConfigError);
  EXPECT_THROW(require_region_kinds({{RegionKind::Homogeneous, {0, 0, 1, 1}}}), ConfigError);
  EXPECT_NO_THROW(require_region_kinds({{RegionKind::Speckle, {0, 0, 1, 1}}}));
}

TEST(Regions, SuggestedWireRegionsHoldTheWires) {
  RunConfig c;
  const PhantomDef p = make_wire_phantom(default_wire_depths());
  const auto regions = suggest_regions(p, c);
  ASSERT_EQ(regions.size(), 4u);
  const RFFrame f = grid_frame();
  for (std::size_t i = 0; i < 3; ++i) {
    const Eigen::Vector2d at = rf_grid_position(f, p.wires[i].center);
    const PixelRect& r = regions[i].rect;
    EXPECT_EQ(regions[i].kind, RegionKind::Target);
    EXPECT_GE(at.x(), r.col);
    EXPECT_LT(at.x(), r.col + r.width);
    EXPECT_GE(at.y(), r.row);
    EXPECT_LT(at.y(), r.row + r.height);
  }
  const PixelRect& noise = regions[3].rect;
  EXPECT_EQ(regions[3].kind, RegionKind::Noise);
  EXPECT_GT(noise.row * f.sample_spacing(), 0.015 + 0.5e-3);
}

TEST(Regions, SuggestedCystRegions) {
  RunConfig c;
  TissuePhantomOptions o;
  o.anechoic_regions = {Circle{Point(0.0, 0.012), 0.0025}};
  const PhantomDef p = make_tissue_phantom(1.0, 1, o);
  const auto regions = suggest_regions(p, c);
  ASSERT_EQ(regions.size(), 3u);
  EXPECT_EQ(regions[0].kind, RegionKind::Background);
  EXPECT_EQ(regions[1].kind, RegionKind::Homogeneous);
  EXPECT_EQ(regions[2].kind, RegionKind::Speckle);
  // the background box lies inside the cyst
  const RFFrame f = grid_frame();
  const auto rays = scanline_rays(f.geometry);
  const PixelRect& b = regions[0].rect;
  for (long line : {b.col, b.col + b.width - 1})
    for (long s : {b.row, b.row + b.height - 1}) {
      const Point q = f.sample_range(static_cast<double>(s)) * rays[static_cast<std::size_t>(line)].direction();
      EXPECT_TRUE(o.anechoic_regions[0].index() == 0 && std::get<Circle>(o.anechoic_regions[0]).contains(q));
    }
}

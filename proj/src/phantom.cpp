#include "eustwin/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "eustwin/error.hpp"
#include "eustwin/random.hpp"
#include "json.hpp"

namespace eustwin {

using nlohmann::json;

namespace {

constexpr double kPillarArcSpacing = 10e-6;
constexpr double kPillarFaceHalfAngle = std::numbers::pi / 3.0;

std::string describe(const Point& p) {
  std::ostringstream os;
  os << "(" << p.x() << ", " << p.y() << ")";
  return os.str();
}

}  // namespace

bool region_contains(const AnechoicRegion& region, const Point& p) {
  return std::visit([&](const auto& shape) { return shape.contains(p); }, region);
}

Rect default_bounds() {
  const double half_span = 53.0 * std::numbers::pi / 180.0;
  const double r_max = kDefaultStartRange + 0.020;
  return Rect{-r_max * std::sin(half_span), r_max * std::sin(half_span),
              kDefaultStartRange * std::cos(half_span), r_max};
}

double diffuse_mean_reflectivity() { return std::sqrt(2.0 / std::numbers::pi); }

double target_reflectivity() { return 100.0 * diffuse_mean_reflectivity(); }

void PhantomDef::validate() const {
  medium.validate();
  if (!(bounds.x_max > bounds.x_min && bounds.z_max > bounds.z_min))
    throw ConfigError("phantom bounds are degenerate");
  for (const auto& w : wires) {
    if (!(w.diameter > 0.0)) throw ConfigError("wire diameter must be > 0");
    if (!bounds.contains(w.center)) throw ConfigError("wire at " + describe(w.center) + " is outside the phantom bounds");
  }
  for (const auto& p : pillars) {
    if (!(p.diameter > 0.0)) throw ConfigError("pillar diameter must be > 0");
    if (!bounds.contains(p.center)) throw ConfigError("pillar at " + describe(p.center) + " is outside the phantom bounds");
  }
  for (const auto& s : scatterers) {
    if (!bounds.contains(s.position))
      throw ConfigError("scatterer at " + describe(s.position) + " is outside the phantom bounds");
    if (!(s.reflectivity >= 0.0)) throw ConfigError("scatterer reflectivity must be >= 0");
    for (const auto& region : anechoic_regions)
      if (region_contains(region, s.position))
        throw DataError("scatterer at " + describe(s.position) + " lies in an anechoic region");
  }
}

std::vector<Scatterer> PhantomDef::point_scatterers() const {
  std::vector<Scatterer> out = scatterers;
  for (const auto& w : wires) out.push_back({w.center, w.reflectivity});
  for (const auto& p : pillars) {
    const double radius = p.diameter / 2.0;
    const double norm = p.center.norm();
    const Point toward = norm > 0.0 ? Point(-p.center / norm) : Point(0.0, -1.0);
    const double base = std::atan2(toward.y(), toward.x());
    const auto n = static_cast<int>(std::ceil(2.0 * kPillarFaceHalfAngle * radius / kPillarArcSpacing));
    for (int i = 0; i <= n; ++i) {
      const double a = base - kPillarFaceHalfAngle + 2.0 * kPillarFaceHalfAngle * i / n;
      out.push_back({p.center + radius * Point(std::cos(a), std::sin(a)), p.reflectivity});
    }
  }
  return out;
}

std::vector<double> default_wire_depths() { return {5e-3, 10e-3, 15e-3}; }

PhantomDef make_wire_phantom(const std::vector<double>& wire_depths,
                             const WirePhantomOptions& options) {
  PhantomDef phantom;
  phantom.medium = options.medium;
  phantom.bounds = options.bounds;
  for (std::size_t i = 0; i < wire_depths.size(); ++i) {
    const double d = wire_depths[i];
    if (i > 0 && !(d > wire_depths[i - 1]))
      throw ConfigError("wire depths must be strictly increasing");
    const Point center(0.0, options.start_range + d);
    if (!(d > 0.0) || !phantom.bounds.contains(center)) {
      std::ostringstream os;
      os << "wire depth " << d << " m is outside the phantom bounds";
      throw ConfigError(os.str());
    }
    phantom.wires.push_back({center, 100e-6, target_reflectivity()});
  }
  phantom.validate();
  return phantom;
}

std::size_t tissue_scatterer_count(double density, const TissuePhantomOptions& options) {
  if (!(density > 0.0)) throw ConfigError("scatterer density must be > 0");
  const double cell = resolution_cell_area(options.reference, options.medium);
  return static_cast<std::size_t>(std::llround(density * options.bounds.area() / cell));
}

PhantomDef make_tissue_phantom(double scatterers_per_res_cell, std::uint64_t seed,
                               const TissuePhantomOptions& options) {
  const std::size_t count = tissue_scatterer_count(scatterers_per_res_cell, options);
  PhantomDef phantom;
  phantom.medium = options.medium;
  phantom.bounds = options.bounds;
  phantom.anechoic_regions = options.anechoic_regions;
  phantom.seed = seed;

  Engine positions = make_engine(seed, "phantom/positions");
  Engine amplitudes = make_engine(seed, "phantom/reflectivity");
  std::uniform_real_distribution<double> ux(options.bounds.x_min, options.bounds.x_max);
  std::uniform_real_distribution<double> uz(options.bounds.z_min, options.bounds.z_max);
  std::normal_distribution<double> gauss(0.0, 1.0);

  phantom.scatterers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(positions);
    const double z = uz(positions);
    const Point p(x, z);
    const double a = std::abs(gauss(amplitudes));
    const bool silent = std::any_of(phantom.anechoic_regions.begin(), phantom.anechoic_regions.end(),
                                    [&](const AnechoicRegion& r) { return region_contains(r, p); });
    if (!silent) phantom.scatterers.push_back({p, a});
  }
  phantom.validate();
  return phantom;
}

// ---------------------------------------------------------------------------
// Regions

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Target: return "target";
    case RegionKind::Background: return "background";
    case RegionKind::Homogeneous: return "homogeneous";
    case RegionKind::Speckle: return "speckle";
    case RegionKind::Noise: return "noise";
  }
  return "unknown";
}

RegionKind region_kind_from_string(const std::string& s) {
  for (auto k : {RegionKind::Target, RegionKind::Background, RegionKind::Homogeneous,
                 RegionKind::Speckle, RegionKind::Noise})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown region kind '" + s + "'");
}

PixelRect clip_region(const PixelRect& rect, long cols, long rows) {
  if (rect.width <= 0 || rect.height <= 0) throw ConfigError("region rectangle is degenerate");
  const long c0 = std::max(rect.col, 0L);
  const long r0 = std::max(rect.row, 0L);
  const long c1 = std::min(rect.col + rect.width, cols);
  const long r1 = std::min(rect.row + rect.height, rows);
  if (c1 <= c0 || r1 <= r0) throw DataError("region does not intersect the image");
  return PixelRect{c0, r0, c1 - c0, r1 - r0};
}

std::vector<RegionSpec> read_regions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open region file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("region file " + path.string() + ": " + e.what());
  }
  std::vector<RegionSpec> regions;
  try {
    if (doc.is_object() && doc.contains("regions")) doc = doc.at("regions");
    for (const auto& r : doc) {
      RegionSpec spec;
      spec.kind = region_kind_from_string(r.at("kind").get<std::string>());
      const std::string space = r.value("space", "image");
      if (space == "image") spec.space = RegionSpace::Image;
      else if (space == "rf") spec.space = RegionSpace::RF;
      else throw ConfigError("region space must be 'image' or 'rf', got '" + space + "'");
      spec.rect = {r.at("col").get<long>(), r.at("row").get<long>(), r.at("width").get<long>(),
                   r.at("height").get<long>()};
      spec.label = r.value("label", "");
      regions.push_back(spec);
    }
  } catch (const json::exception& e) {
    throw ConfigError("region file " + path.string() + ": " + e.what());
  }
  return regions;
}

void write_regions(const std::filesystem::path& path, const std::vector<RegionSpec>& regions) {
  json list = json::array();
  for (const auto& r : regions) {
    list.push_back({{"kind", to_string(r.kind)},
                    {"space", r.space == RegionSpace::Image ? "image" : "rf"},
                    {"col", r.rect.col},
                    {"row", r.rect.row},
                    {"width", r.rect.width},
                    {"height", r.rect.height},
                    {"label", r.label}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << json{{"format", "eustwin-regions"}, {"version", 1}, {"regions", list}}.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Phantom document

std::string phantom_to_json(const PhantomDef& phantom) {
  json scatterers = json::array();
  for (const auto& s : phantom.scatterers)
    scatterers.push_back({s.position.x(), s.position.y(), s.reflectivity});
  json wires = json::array();
  for (const auto& w : phantom.wires)
    wires.push_back({{"x", w.center.x()}, {"z", w.center.y()}, {"diameter", w.diameter},
                     {"reflectivity", w.reflectivity}});
  json pillars = json::array();
  for (const auto& p : phantom.pillars)
    pillars.push_back({{"x", p.center.x()}, {"z", p.center.y()}, {"diameter", p.diameter},
                       {"reflectivity", p.reflectivity}});
  json anechoic = json::array();
  for (const auto& region : phantom.anechoic_regions) {
    if (const auto* c = std::get_if<Circle>(&region))
      anechoic.push_back({{"type", "circle"}, {"x", c->center.x()}, {"z", c->center.y()},
                          {"radius", c->radius}});
    else {
      const auto& r = std::get<Rect>(region);
      anechoic.push_back({{"type", "rect"}, {"x_min", r.x_min}, {"x_max", r.x_max},
                          {"z_min", r.z_min}, {"z_max", r.z_max}});
    }
  }
  const auto& b = phantom.bounds;
  json doc = {
      {"format", "eustwin-phantom"},
      {"version", 1},
      {"seed", phantom.seed},
      {"medium", {{"sound_speed", phantom.medium.sound_speed},
                  {"attenuation_coeff", phantom.medium.attenuation_coeff}}},
      {"bounds", {{"x_min", b.x_min}, {"x_max", b.x_max}, {"z_min", b.z_min}, {"z_max", b.z_max}}},
      {"wires", wires},
      {"pillars", pillars},
      {"anechoic_regions", anechoic},
      {"scatterers", scatterers},
  };
  return doc.dump(1);
}

PhantomDef phantom_from_json(const std::string& text) {
  PhantomDef phantom;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "eustwin-phantom")
      throw ConfigError("not a phantom document");
    if (doc.at("version").get<int>() != 1) throw ConfigError("unsupported phantom version");
    phantom.seed = doc.value("seed", std::uint64_t{0});
    const auto& m = doc.at("medium");
    phantom.medium = {m.at("sound_speed").get<double>(), m.at("attenuation_coeff").get<double>()};
    const auto& b = doc.at("bounds");
    phantom.bounds = {b.at("x_min").get<double>(), b.at("x_max").get<double>(),
                      b.at("z_min").get<double>(), b.at("z_max").get<double>()};
    for (const auto& w : doc.value("wires", json::array()))
      phantom.wires.push_back({Point(w.at("x").get<double>(), w.at("z").get<double>()),
                               w.value("diameter", 100e-6),
                               w.value("reflectivity", target_reflectivity())});
    for (const auto& p : doc.value("pillars", json::array()))
      phantom.pillars.push_back({Point(p.at("x").get<double>(), p.at("z").get<double>()),
                                 p.value("diameter", 4e-3),
                                 p.value("reflectivity", target_reflectivity())});
    for (const auto& r : doc.value("anechoic_regions", json::array())) {
      const std::string type = r.at("type").get<std::string>();
      if (type == "circle")
        phantom.anechoic_regions.emplace_back(
            Circle{Point(r.at("x").get<double>(), r.at("z").get<double>()), r.at("radius").get<double>()});
      else if (type == "rect")
        phantom.anechoic_regions.emplace_back(Rect{r.at("x_min").get<double>(), r.at("x_max").get<double>(),
                                                   r.at("z_min").get<double>(), r.at("z_max").get<double>()});
      else
        throw ConfigError("unknown anechoic region type '" + type + "'");
    }
    for (const auto& s : doc.value("scatterers", json::array()))
      phantom.scatterers.push_back(
          {Point(s.at(0).get<double>(), s.at(1).get<double>()), s.at(2).get<double>()});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("phantom document: ") + e.what());
  }
  phantom.validate();
  return phantom;
}

void write_phantom(const std::filesystem::path& path, const PhantomDef& phantom) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << phantom_to_json(phantom) << "\n";
}

PhantomDef read_phantom(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open phantom file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return phantom_from_json(buffer.str());
}

}  // namespace eustwin

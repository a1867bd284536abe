#include "eustwin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "eustwin/error.hpp"
#include "json.hpp"

namespace eustwin {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

// Reads the keys of one JSON object and remembers which were used, so that
// anything left over can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) reject(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) reject(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) reject(field(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) out = v->get<Int>();
        else reject(field(key), "expected a non-negative integer");
      } else {
        out = v->get<Int>();
      }
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) reject(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) reject(field(key), "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) reject(field(key), "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!used_.count(it.key())) reject(field(it.key()), "unknown key");
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> used_;
};

// Prefix validation errors from the domain types with the section they came from.
template <typename F>
void within(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    throw ConfigError("config: " + path + "." + e.what());
  }
}

void read_transducer(Section& parent, const std::string& key, TransducerSpec& spec) {
  const json* v = parent.find(key);
  if (!v) return;
  Section s(*v, parent.field(key));
  s.number("center_frequency", spec.center_frequency);
  s.number("fractional_bandwidth", spec.fractional_bandwidth);
  s.number("focal_depth", spec.focal_depth);
  s.number("aperture_diameter", spec.aperture_diameter);
  std::string mount = spec.mount == Mount::Top ? "top" : "bottom";
  s.string("mount", mount);
  if (mount == "top") spec.mount = Mount::Top;
  else if (mount == "bottom") spec.mount = Mount::Bottom;
  else reject(s.field("mount"), "must be 'top' or 'bottom'");
  s.finish();
}

void read_geometry(Section& parent, ProbeGeometry& g) {
  const json* v = parent.find("geometry");
  if (!v) return;
  Section s(*v, "geometry");
  s.number("reflector_angle", g.reflector_angle);
  s.number("roi_center", g.roi_center);
  s.number("roi_span", g.roi_span);
  s.integer("scanlines_per_frame", g.scanlines_per_frame);
  s.number("rf_sample_rate", g.rf_sample_rate);
  s.number("depth", g.depth);
  s.number("start_range", g.start_range);
  s.number("rotation_speed", g.rotation_speed);
  s.number("phase_offset", g.phase_offset);
  s.numbers("pillar_angles", g.pillar_angles);
  s.number("pillar_radius", g.pillar_radius);
  s.finish();
}

AnechoicRegion read_anechoic(const json& doc, const std::string& path) {
  Section s(doc, path);
  std::string type;
  s.string("type", type);
  if (type == "circle") {
    Circle c;
    double x = 0.0, z = 0.0;
    s.number("x", x);
    s.number("z", z);
    s.number("radius", c.radius);
    c.center = Point(x, z);
    s.finish();
    if (!(c.radius > 0.0)) reject(s.field("radius"), "must be > 0");
    return c;
  }
  if (type == "rect") {
    Rect r;
    s.number("x_min", r.x_min);
    s.number("x_max", r.x_max);
    s.number("z_min", r.z_min);
    s.number("z_max", r.z_max);
    s.finish();
    if (!(r.x_max > r.x_min && r.z_max > r.z_min)) reject(path, "rectangle is degenerate");
    return r;
  }
  reject(s.field("type"), "must be 'circle' or 'rect'");
}

void read_phantom(Section& parent, PhantomConfig& p) {
  const json* v = parent.find("phantom");
  if (!v) return;
  Section s(*v, "phantom");
  std::string kind = to_string(p.kind);
  s.string("kind", kind);
  if (kind == "wire") p.kind = PhantomKind::Wire;
  else if (kind == "tissue") p.kind = PhantomKind::Tissue;
  else if (kind == "file") p.kind = PhantomKind::File;
  else reject(s.field("kind"), "must be 'wire', 'tissue' or 'file'");
  s.numbers("wire_depths", p.wire_depths);
  s.number("density", p.density);
  if (const json* a = s.find("anechoic")) {
    if (!a->is_array()) reject(s.field("anechoic"), "expected an array");
    p.anechoic.clear();
    for (std::size_t i = 0; i < a->size(); ++i)
      p.anechoic.push_back(read_anechoic((*a)[i], s.field("anechoic") + "[" + std::to_string(i) + "]"));
  }
  std::string path = p.path.string();
  s.string("path", path);
  p.path = path;
  s.finish();
}

json anechoic_to_json(const AnechoicRegion& region) {
  if (const auto* c = std::get_if<Circle>(&region))
    return {{"type", "circle"}, {"x", c->center.x()}, {"z", c->center.y()}, {"radius", c->radius}};
  const auto& r = std::get<Rect>(region);
  return {{"type", "rect"}, {"x_min", r.x_min}, {"x_max", r.x_max}, {"z_min", r.z_min}, {"z_max", r.z_max}};
}

json transducer_to_json(const TransducerSpec& t) {
  return {{"center_frequency", t.center_frequency},
          {"fractional_bandwidth", t.fractional_bandwidth},
          {"focal_depth", t.focal_depth},
          {"aperture_diameter", t.aperture_diameter},
          {"mount", t.mount == Mount::Top ? "top" : "bottom"}};
}

}  // namespace

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Wire: return "wire";
    case PhantomKind::Tissue: return "tissue";
    case PhantomKind::File: return "file";
  }
  return "unknown";
}

Medium RunConfig::effective_medium() const {
  if (medium) return *medium;
  return phantom.kind == PhantomKind::Wire ? water_medium() : tissue_medium();
}

void RunConfig::validate() const {
  if (pairs < 1) reject("pairs", "must be >= 1");
  if (!(noise_sigma >= 0.0)) reject("noise_sigma", "must be >= 0");
  if (!(dynamic_range > 0.0)) reject("dynamic_range", "must be > 0");
  if (!(ceiling > 0.0)) reject("ceiling", "must be > 0");
  within("low", [&] { low.validate(); });
  within("high", [&] { high.validate(); });
  if (low.mount != Mount::Top) reject("low.mount", "the low-frequency element is top mounted");
  if (high.mount != Mount::Bottom) reject("high.mount", "the high-frequency element is bottom mounted");
  within("geometry", [&] { geometry.validate(); });
  within("medium", [&] { effective_medium().validate(); });
  if (phantom.kind == PhantomKind::Tissue && !(phantom.density > 0.0))
    reject("phantom.density", "must be > 0");
  if (phantom.kind == PhantomKind::Wire) {
    if (phantom.wire_depths.empty()) reject("phantom.wire_depths", "must not be empty");
    for (std::size_t i = 0; i < phantom.wire_depths.size(); ++i) {
      if (!(phantom.wire_depths[i] > 0.0 && phantom.wire_depths[i] < geometry.depth))
        reject("phantom.wire_depths", "each depth must lie inside the imaging window");
      if (i > 0 && !(phantom.wire_depths[i] > phantom.wire_depths[i - 1]))
        reject("phantom.wire_depths", "depths must be strictly increasing");
    }
  }
  if (phantom.kind == PhantomKind::File && phantom.path.empty())
    reject("phantom.path", "required when phantom.kind is 'file'");
  within("dataset", [&] { grid.validate(); });
  if (folds < 1) reject("dataset.folds", "must be >= 1");
  within("metrics", [&] { SSIMParams{ceiling, ssim_window}.validate(); });
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "");
  root.integer("seed", c.seed);
  root.integer("pairs", c.pairs);
  std::string output = c.output.string();
  root.string("output", output);
  c.output = output;
  root.number("noise_sigma", c.noise_sigma);
  root.number("dynamic_range", c.dynamic_range);
  root.number("ceiling", c.ceiling);
  read_transducer(root, "low", c.low);
  read_transducer(root, "high", c.high);
  read_geometry(root, c.geometry);
  if (const json* v = root.find("medium")) {
    Section s(*v, "medium");
    Medium m = tissue_medium();
    s.number("sound_speed", m.sound_speed);
    s.number("attenuation_coeff", m.attenuation_coeff);
    s.finish();
    c.medium = m;
  }
  read_phantom(root, c.phantom);
  if (const json* v = root.find("dataset")) {
    Section s(*v, "dataset");
    s.integer("patch_size", c.grid.patch_size);
    s.integer("stride_w", c.grid.stride_w);
    s.integer("stride_h", c.grid.stride_h);
    s.integer("folds", c.folds);
    s.finish();
  }
  if (const json* v = root.find("metrics")) {
    Section s(*v, "metrics");
    s.integer("ssim_window", c.ssim_window);
    std::string peak = c.peak == PeakMode::Ceiling ? "ceiling" : "max";
    s.string("peak", peak);
    if (peak == "ceiling") c.peak = PeakMode::Ceiling;
    else if (peak == "max") c.peak = PeakMode::ObservedMax;
    else reject("metrics.peak", "must be 'ceiling' or 'max'");
    s.finish();
  }
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string config_to_json(const RunConfig& c) {
  const Medium m = c.effective_medium();
  json anechoic = json::array();
  for (const auto& a : c.phantom.anechoic) anechoic.push_back(anechoic_to_json(a));
  const auto& g = c.geometry;
  const json doc = {
      {"seed", c.seed},
      {"pairs", c.pairs},
      {"output", c.output.string()},
      {"noise_sigma", c.noise_sigma},
      {"dynamic_range", c.dynamic_range},
      {"ceiling", c.ceiling},
      {"low", transducer_to_json(c.low)},
      {"high", transducer_to_json(c.high)},
      {"geometry",
       {{"reflector_angle", g.reflector_angle},
        {"roi_center", g.roi_center},
        {"roi_span", g.roi_span},
        {"scanlines_per_frame", g.scanlines_per_frame},
        {"rf_sample_rate", g.rf_sample_rate},
        {"depth", g.depth},
        {"start_range", g.start_range},
        {"rotation_speed", g.rotation_speed},
        {"phase_offset", g.phase_offset},
        {"pillar_angles", g.pillar_angles},
        {"pillar_radius", g.pillar_radius}}},
      {"medium", {{"sound_speed", m.sound_speed}, {"attenuation_coeff", m.attenuation_coeff}}},
      {"phantom",
       {{"kind", to_string(c.phantom.kind)},
        {"wire_depths", c.phantom.wire_depths},
        {"density", c.phantom.density},
        {"anechoic", anechoic},
        {"path", c.phantom.path.string()}}},
      {"dataset",
       {{"patch_size", c.grid.patch_size},
        {"stride_w", c.grid.stride_w},
        {"stride_h", c.grid.stride_h},
        {"folds", c.folds}}},
      {"metrics",
       {{"ssim_window", c.ssim_window}, {"peak", c.peak == PeakMode::Ceiling ? "ceiling" : "max"}}}};
  return doc.dump(2);
}

}  // namespace eustwin

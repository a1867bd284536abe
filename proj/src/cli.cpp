#include "eustwin/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "eustwin/config.hpp"
#include "eustwin/dataset.hpp"
#include "eustwin/error.hpp"
#include "eustwin/evaluate.hpp"
#include "eustwin/imaging.hpp"
#include "eustwin/metrics.hpp"
#include "eustwin/phantom.hpp"
#include "eustwin/random.hpp"
#include "eustwin/scanner.hpp"
#include "json.hpp"

namespace eustwin::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  if (auto existing = spdlog::get("eustwin")) return existing;
  auto log = spdlog::stderr_color_st("eustwin");
  log->set_pattern("[%l] %v");
  return log;
}

void configure_logging() {
  const char* env = std::getenv("EUSTWIN_LOG");
  auto level = spdlog::level::warn;
  if (env && *env) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  logger()->set_level(level);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string pair_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%04d", i);
  return buf;
}

// Tight box around the imaging fan.
Rect fan_bounds(const ProbeGeometry& g) {
  const double half = std::min(g.roi_span / 2.0, 180.0) * std::numbers::pi / 180.0;
  const double r_max = g.start_range + g.depth;
  const double x = r_max * (half < std::numbers::pi / 2.0 ? std::sin(half) : 1.0);
  const double z_min = half < std::numbers::pi / 2.0 ? g.start_range * std::cos(half) : -r_max;
  return Rect{-x, x, z_min, r_max};
}

PhantomDef build_phantom(const RunConfig& c, std::uint64_t seed) {
  switch (c.phantom.kind) {
    case PhantomKind::Wire: {
      WirePhantomOptions o{c.effective_medium(), fan_bounds(c.geometry), c.geometry.start_range};
      return make_wire_phantom(c.phantom.wire_depths, o);
    }
    case PhantomKind::Tissue: {
      TissuePhantomOptions o{c.effective_medium(), fan_bounds(c.geometry), c.phantom.anechoic, c.high};
      return make_tissue_phantom(c.phantom.density, seed, o);
    }
    case PhantomKind::File: {
      PhantomDef p = read_phantom(c.phantom.path);
      if (c.medium) p.medium = *c.medium;
      return p;
    }
  }
  throw ConfigError("unknown phantom kind");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_to_json(const ImageMetrics& m) {
  json targets = json::array();
  for (const auto& t : m.targets)
    targets.push_back({{"label", t.label},
                       {"lateral_fwhm_m", optional_number(t.lateral_fwhm)},
                       {"axial_fwhm_m", optional_number(t.axial_fwhm)},
                       {"esnr_db", optional_number(t.esnr_db)}});
  json doc = {{"transducer_id", m.transducer_id},
              {"lateral_fwhm_m", optional_number(m.lateral_fwhm)},
              {"axial_fwhm_m", optional_number(m.axial_fwhm)},
              {"cnr", optional_number(m.cnr)},
              {"ssnr", optional_number(m.ssnr)},
              {"targets", targets}};
  if (m.targets.size() >= 2 && m.targets.front().esnr_db && m.targets.back().esnr_db)
    doc["esnr_drop_db"] = *m.targets.front().esnr_db - *m.targets.back().esnr_db;
  return doc;
}

std::vector<std::string> run_pair_ids(const fs::path& run_dir) {
  std::vector<std::string> ids;
  if (fs::exists(run_dir / "run.json")) {
    const json doc = read_json(run_dir / "run.json");
    for (const auto& p : doc.at("pairs")) ids.push_back(p.at("id").get<std::string>());
    return ids;
  }
  if (!fs::is_directory(run_dir / "low")) throw DataError(run_dir.string() + " is not a run directory");
  for (const auto& e : fs::directory_iterator(run_dir / "low"))
    if (e.path().extension() == ".pgm") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> pgm_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 5) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) os << (i ? ", " : "") << items[i];
  if (items.size() > limit) os << ", ... (" << items.size() << " total)";
  return os.str();
}

// Options every subcommand understands.
struct Common {
  std::string config;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "Root seed (overrides the config)");
  }

  RunConfig load() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    if (seed_opt->count()) c.seed = seed;
    return c;
  }
};

// Commands reading a run default to the seed it was simulated with.
void inherit_run_seed(RunConfig& c, const Common& common, const fs::path& run_dir) {
  if (!common.seed_opt->count() && common.config.empty() && fs::exists(run_dir / "run.json"))
    c.seed = read_json(run_dir / "run.json").value("seed", std::uint64_t{0});
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  Common common;
  std::string out;
  int pairs = 1;
  double noise_sigma = 0.0, dynamic_range = 0.0, density = 0.0;
  std::string phantom;
  CLI::Option *out_opt, *pairs_opt, *noise_opt, *dr_opt, *density_opt, *phantom_opt;
};

int cmd_simulate(const SimulateArgs& a) {
  RunConfig c = a.common.load();
  if (a.out_opt->count()) c.output = a.out;
  if (a.pairs_opt->count()) c.pairs = a.pairs;
  if (a.noise_opt->count()) c.noise_sigma = a.noise_sigma;
  if (a.dr_opt->count()) c.dynamic_range = a.dynamic_range;
  if (a.density_opt->count()) c.phantom.density = a.density;
  if (a.phantom_opt->count()) {
    if (a.phantom == "wire") c.phantom.kind = PhantomKind::Wire;
    else if (a.phantom == "tissue") c.phantom.kind = PhantomKind::Tissue;
    else c.phantom.kind = PhantomKind::File, c.phantom.path = a.phantom;
  }
  c.validate();

  const fs::path out = c.output;
  fs::create_directories(out / "low");
  fs::create_directories(out / "high");
  fs::create_directories(out / "rf");

  json pairs = json::array();
  std::vector<std::string> ids;
  for (int i = 0; i < c.pairs; ++i) {
    const std::string id = pair_id(i);
    const std::uint64_t phantom_seed = derive_seed(c.seed, "phantom", static_cast<std::uint64_t>(i));
    const std::uint64_t noise_seed = derive_seed(c.seed, "noise", static_cast<std::uint64_t>(i));
    logger()->info("{}: building {} phantom", id, to_string(c.phantom.kind));
    const PhantomDef phantom = build_phantom(c, phantom_seed);
    if (i == 0) write_regions(out / "regions.json", suggest_regions(phantom, c));

    logger()->info("{}: synthesizing {} scatterers", id, phantom.point_scatterers().size());
    const PairedRFFrame rf = simulate_pair(phantom, c.geometry, c.low, c.high, c.noise_sigma, noise_seed);
    ImagePair images = to_image_pair(rf, c.dynamic_range, c.ceiling);
    images.low.meta.seed = c.seed;
    images.high.meta.seed = c.seed;

    write_bmode(out / "low" / (id + ".pgm"), images.low);
    write_bmode(out / "high" / (id + ".pgm"), images.high);
    write_rf_frame(out / "rf" / (id + "_low.rf"), rf.low);
    write_rf_frame(out / "rf" / (id + "_high.rf"), rf.high);
    pairs.push_back({{"id", id}, {"phantom_seed", phantom_seed}, {"noise_seed", noise_seed}});
    ids.push_back(id);
  }

  json config = json::parse(config_to_json(c));
  config.erase("output");
  const json run = {{"format", "eustwin-run"}, {"version", 1}, {"seed", c.seed},
                    {"config", config},        {"pairs", pairs}};
  write_text(out / "run.json", run.dump(2) + "\n");

  const json summary = {{"command", "simulate"},
                        {"seed", c.seed},
                        {"output", out.string()},
                        {"pairs", c.pairs},
                        {"phantom", to_string(c.phantom.kind)},
                        {"width", c.geometry.scanlines_per_frame},
                        {"height", kDatasetHeight}};
  std::cout << summary.dump() << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  Common common;
  std::string run_dir, regions, pair, out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  RunConfig c = a.common.load();
  const fs::path run_dir = a.run_dir;
  inherit_run_seed(c, a.common, run_dir);
  const fs::path regions_path = a.regions.empty() ? run_dir / "regions.json" : fs::path(a.regions);
  const auto regions = read_regions(regions_path);
  require_region_kinds(regions);

  std::vector<std::string> ids = run_pair_ids(run_dir);
  if (!a.pair.empty()) {
    if (std::find(ids.begin(), ids.end(), a.pair) == ids.end())
      throw DataError("pair " + a.pair + " is not part of " + run_dir.string());
    ids = {a.pair};
  }

  json pairs = json::array();
  for (const auto& id : ids) {
    json entry = {{"id", id}};
    for (const char* freq : {"low", "high"}) {
      const RFFrame rf = read_rf_frame(run_dir / "rf" / (id + "_" + freq + ".rf"));
      const BModeImage bmode = read_bmode(run_dir / freq / (id + ".pgm"));
      entry[freq] = metrics_to_json(evaluate_frame(rf, bmode.pixels, regions));
    }
    pairs.push_back(entry);
  }
  const json report = {{"format", "eustwin-metrics"}, {"version", 1}, {"seed", c.seed}, {"pairs", pairs}};
  const fs::path out = a.out.empty() ? run_dir / "metrics.json" : fs::path(a.out);
  write_text(out, report.dump(2) + "\n");
  std::cout << json{{"command", "evaluate"}, {"seed", c.seed}, {"pairs", ids.size()}, {"report", out.string()}}.dump()
            << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  Common common;
  std::string generated, reference, regions, out, peak;
  double ceiling = 255.0;
  int window = 7;
  CLI::Option *ceiling_opt, *window_opt, *peak_opt;
};

int cmd_score(const ScoreArgs& a) {
  RunConfig c = a.common.load();
  if (a.ceiling_opt->count()) c.ceiling = a.ceiling;
  if (a.window_opt->count()) c.ssim_window = a.window;
  if (a.peak_opt->count()) {
    if (a.peak == "ceiling") c.peak = PeakMode::Ceiling;
    else if (a.peak == "max") c.peak = PeakMode::ObservedMax;
    else throw ConfigError("--peak must be 'ceiling' or 'max'");
  }
  const SSIMParams params{c.ceiling, c.ssim_window};
  params.validate();

  std::optional<PixelRect> crop;
  if (!a.regions.empty()) {
    const auto regions = read_regions(a.regions);
    if (regions.empty()) throw ConfigError("regions: the file lists no region");
    if (regions.front().space != RegionSpace::Image)
      throw ConfigError("regions: score needs an image-space region");
    crop = regions.front().rect;
  }

  const auto gen = pgm_names(a.generated);
  const auto ref = pgm_names(a.reference);
  std::vector<std::string> only_gen, only_ref;
  std::set_difference(gen.begin(), gen.end(), ref.begin(), ref.end(), std::back_inserter(only_gen));
  std::set_difference(ref.begin(), ref.end(), gen.begin(), gen.end(), std::back_inserter(only_ref));
  if (!only_gen.empty() || !only_ref.empty()) {
    std::ostringstream os;
    os << "image sets do not match";
    if (!only_gen.empty()) os << "; only in " << a.generated << ": " << join(only_gen);
    if (!only_ref.empty()) os << "; only in " << a.reference << ": " << join(only_ref);
    throw DataError(os.str());
  }
  if (gen.empty()) throw DataError("no .pgm images in " + a.generated);

  std::vector<PairScore> scores;
  for (const auto& name : gen) {
    Image x = read_bmode(fs::path(a.generated) / name).pixels;
    Image y = read_bmode(fs::path(a.reference) / name).pixels;
    if (crop) {
      const PixelRect r = clip_region(*crop, x.cols(), x.rows());
      if (x.rows() != y.rows() || x.cols() != y.cols()) throw DimensionMismatch(name + ": image sizes differ");
      x = Image(x.block(r.row, r.col, r.height, r.width));
      y = Image(y.block(r.row, r.col, r.height, r.width));
    }
    PairScore s;
    s.name = name;
    s.ssim = ssim(x, y, params);
    s.psnr = psnr(x, y, c.ceiling, c.peak);
    s.rmse = rmse(x, y);
    scores.push_back(s);
  }
  const ScoreReport report = aggregate_scores(std::move(scores));

  json pairs = json::array();
  for (const auto& p : report.pairs)
    pairs.push_back({{"name", p.name},
                     {"ssim", p.ssim},
                     {"psnr_db", p.psnr.infinite ? json(nullptr) : json(p.psnr.db)},
                     {"psnr_infinite", p.psnr.infinite},
                     {"rmse", p.rmse}});
  auto agg = [](const Aggregate& g) {
    return json{{"mean", g.infinite ? json(nullptr) : json(g.mean)},
                {"std", g.infinite ? json(nullptr) : json(g.std)},
                {"infinite", g.infinite}};
  };
  const json doc = {{"format", "eustwin-score"},
                    {"version", 1},
                    {"seed", c.seed},
                    {"ceiling", c.ceiling},
                    {"peak", c.peak == PeakMode::Ceiling ? "ceiling" : "max"},
                    {"ssim_window", c.ssim_window},
                    {"pairs", pairs},
                    {"ssim", agg(report.ssim)},
                    {"psnr_db", agg(report.psnr)},
                    {"rmse", agg(report.rmse)}};
  if (a.out.empty()) {
    std::cout << doc.dump(2) << std::endl;
  } else {
    write_text(a.out, doc.dump(2) + "\n");
    std::cout << json{{"command", "score"}, {"seed", c.seed}, {"pairs", report.pairs.size()}, {"report", a.out}}.dump()
              << std::endl;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// patchify / reconstruct

PatchGrid grid_for(const RunConfig& c, Eigen::Index width, Eigen::Index height) {
  PatchGrid g = c.grid;
  g.width = width;
  g.height = height;
  g.validate();
  return g;
}

json grid_to_json(const PatchGrid& g) {
  return {{"patch_size", g.patch_size}, {"stride_w", g.stride_w}, {"stride_h", g.stride_h},
          {"width", g.width},           {"height", g.height}};
}

struct PatchifyArgs {
  Common common;
  std::vector<std::string> images;
  std::string out, frequency, id;
};

int cmd_patchify(const PatchifyArgs& a) {
  const RunConfig c = a.common.load();
  if (!a.id.empty() && a.images.size() != 1) throw ConfigError("--id needs exactly one input image");
  const fs::path out = a.out;
  fs::create_directories(out);
  json written = json::array();
  std::optional<PatchGrid> grid;
  for (const auto& input : a.images) {
    const BModeImage image = read_bmode(input);
    std::string tag = a.frequency.empty() ? image.meta.transducer_id : a.frequency;
    if (tag.empty()) throw ConfigError(input + ": no frequency in the sidecar; pass --frequency");
    const Frequency f = frequency_from_string(tag);
    const std::string id = a.id.empty() ? fs::path(input).stem().string() : a.id;
    const PatchGrid g = grid_for(c, image.width(), image.height());
    if (grid && (grid->width != g.width || grid->height != g.height))
      throw DimensionMismatch(input + ": image size differs from the other inputs");
    grid = g;
    for (const auto& p : patchify(image.pixels, g, id, f)) {
      const std::string name = patch_file_name(id, p.col, p.row, f);
      write_pgm(out / name, p.pixels, image.meta.ceiling);
      written.push_back(name);
    }
  }
  const json index = {{"format", "eustwin-patches"}, {"version", 1}, {"seed", c.seed},
                      {"grid", grid_to_json(*grid)}, {"patches", written}};
  write_text(out / "patches.json", index.dump(2) + "\n");
  std::cout << json{{"command", "patchify"}, {"seed", c.seed}, {"patches", written.size()}, {"output", out.string()}}.dump()
            << std::endl;
  return 0;
}

struct ReconstructArgs {
  Common common;
  std::string input, id, frequency = "low", out, blend = "mean";
  Eigen::Index width = kDatasetWidth, height = kDatasetHeight;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const RunConfig c = a.common.load();
  const Frequency f = frequency_from_string(a.frequency);
  BlendMode blend;
  if (a.blend == "mean") blend = BlendMode::Mean;
  else if (a.blend == "feather") blend = BlendMode::Feather;
  else throw ConfigError("--blend must be 'mean' or 'feather'");

  const fs::path input = a.input;
  PatchSet patches;
  PatchGrid grid;
  if (fs::is_regular_file(input)) {
    grid = read_manifest(input).grid;
    for (auto& p : import_patches(input))
      if (p.source_id == a.id && p.frequency == f) patches.push_back(std::move(p));
  } else {
    grid = grid_for(c, a.width, a.height);
    for (const auto& name : pgm_names(input)) {
      auto p = parse_patch_file_name(name);
      if (!p || p->source_id != a.id || p->frequency != f) continue;
      p->pixels = read_pgm(input / name);
      patches.push_back(std::move(*p));
    }
  }
  if (patches.empty()) throw DataError("no " + a.frequency + " patches for '" + a.id + "' in " + a.input);
  const Image image = reconstruct(patches, grid, f, blend);
  write_pgm(a.out, image);
  std::cout << json{{"command", "reconstruct"}, {"seed", c.seed}, {"patches", patches.size()}, {"output", a.out}}.dump()
            << std::endl;
  return 0;
}

// ---------------------------------------------------------------------------
// split / export

struct SplitArgs {
  Common common;
  std::size_t count = 0;
  std::string run_dir, strata, out;
  int k = 5;
  CLI::Option *k_opt, *count_opt;
};

json folds_to_json(const FoldAssignment& folds, const std::vector<std::string>& ids) {
  json members = json::array();
  for (int f = 0; f < folds.k; ++f) {
    json list = json::array();
    for (auto i : folds.members(f)) list.push_back(ids.empty() ? json(i) : json(ids[i]));
    members.push_back(list);
  }
  return {{"format", "eustwin-folds"}, {"version", 1},        {"seed", folds.seed},
          {"k", folds.k},              {"count", folds.fold_of.size()}, {"fold_of", folds.fold_of},
          {"sizes", folds.sizes()},    {"folds", members}};
}

int cmd_split(const SplitArgs& a) {
  RunConfig c = a.common.load();
  if (a.k_opt->count()) c.folds = a.k;
  std::vector<std::string> ids;
  std::size_t n = a.count;
  if (!a.run_dir.empty()) {
    ids = run_pair_ids(a.run_dir);
    n = ids.size();
    inherit_run_seed(c, a.common, a.run_dir);
  } else if (!a.count_opt->count()) {
    throw ConfigError("split needs --count or --run");
  }
  std::optional<std::vector<int>> strata;
  if (!a.strata.empty()) {
    const json doc = read_json(a.strata);
    if (!doc.is_array()) throw ConfigError("strata: expected an array of integer labels");
    strata.emplace();
    for (const auto& v : doc) {
      if (!v.is_number_integer()) throw ConfigError("strata: expected an array of integer labels");
      strata->push_back(v.get<int>());
    }
  }
  const FoldAssignment folds = split_folds(n, c.folds, c.seed, strata);
  const std::string text = folds_to_json(folds, ids).dump(2) + "\n";
  if (a.out.empty()) std::cout << text;
  else write_text(a.out, text);
  return 0;
}

struct ExportArgs {
  Common common;
  std::string run_dir, out;
  int k = 5;
  CLI::Option* k_opt;
};

int cmd_export(const ExportArgs& a) {
  RunConfig c = a.common.load();
  if (a.k_opt->count()) c.folds = a.k;
  const fs::path run_dir = a.run_dir;
  inherit_run_seed(c, a.common, run_dir);
  const auto ids = run_pair_ids(run_dir);
  std::map<std::string, std::uint64_t> pair_seeds;
  if (fs::exists(run_dir / "run.json"))
    for (const auto& p : read_json(run_dir / "run.json").at("pairs"))
      pair_seeds[p.at("id").get<std::string>()] = p.value("phantom_seed", std::uint64_t{0});

  std::vector<NamedPair> pairs;
  for (const auto& id : ids) {
    NamedPair p;
    p.source_id = id;
    p.images.low = read_bmode(run_dir / "low" / (id + ".pgm"));
    p.images.high = read_bmode(run_dir / "high" / (id + ".pgm"));
    p.seed = pair_seeds.count(id) ? pair_seeds[id] : 0;
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw DataError(run_dir.string() + " holds no image pairs");
  const PatchGrid grid = grid_for(c, pairs.front().images.low.width(), pairs.front().images.low.height());
  const FoldAssignment folds = split_folds(pairs.size(), c.folds, c.seed);
  const Manifest m = export_for_training(pairs, folds, grid, a.out, c.seed);
  std::cout << json{{"command", "export"}, {"seed", c.seed}, {"pairs", m.entries.size()}, {"output", a.out}}.dump()
            << std::endl;
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Paired low/high-frequency ultrasound simulation and dataset toolkit", "eustwin"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate paired RF frames and B-mode images");
  sim.common.attach(s);
  sim.out_opt = s->add_option("--out", sim.out, "Output directory");
  sim.pairs_opt = s->add_option("--pairs", sim.pairs, "Number of pairs");
  sim.noise_opt = s->add_option("--noise-sigma", sim.noise_sigma, "RF noise standard deviation");
  sim.dr_opt = s->add_option("--dynamic-range", sim.dynamic_range, "Log-compression dynamic range, dB");
  sim.phantom_opt = s->add_option("--phantom", sim.phantom, "wire, tissue, or a phantom JSON file");
  sim.density_opt = s->add_option("--density", sim.density, "Tissue scatterers per resolution cell");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Resolution, eSNR, CNR and SSNR of a simulated run");
  ev.common.attach(e);
  e->add_option("run_dir", ev.run_dir, "Run directory written by simulate")->required();
  e->add_option("--regions", ev.regions, "Region file (default: <run_dir>/regions.json)");
  e->add_option("--pair", ev.pair, "Evaluate a single pair");
  e->add_option("--out", ev.out, "Report path (default: <run_dir>/metrics.json)");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "SSIM, PSNR and RMSE of generated against reference images");
  sc.common.attach(score);
  score->add_option("generated", sc.generated, "Directory of generated images")->required();
  score->add_option("reference", sc.reference, "Directory of reference images")->required();
  sc.ceiling_opt = score->add_option("--ceiling", sc.ceiling, "Dynamic-range ceiling L");
  sc.window_opt = score->add_option("--ssim-window", sc.window, "SSIM window side (0: global)");
  sc.peak_opt = score->add_option("--peak", sc.peak, "PSNR peak: ceiling or max");
  score->add_option("--regions", sc.regions, "Score only inside the first region of this file");
  score->add_option("--out", sc.out, "Report path (default: stdout)");

  PatchifyArgs pa;
  auto* p = app.add_subcommand("patchify", "Cut images into training patches");
  pa.common.attach(p);
  p->add_option("images", pa.images, "Input images (.pgm)")->required();
  p->add_option("--out", pa.out, "Output directory")->required();
  p->add_option("--frequency", pa.frequency, "low or high (default: from the sidecar)");
  p->add_option("--id", pa.id, "Source id (default: file stem)");

  ReconstructArgs re;
  auto* r = app.add_subcommand("reconstruct", "Reassemble an image from its patches");
  re.common.attach(r);
  r->add_option("input", re.input, "Patch directory or manifest.json")->required();
  r->add_option("--id", re.id, "Source id")->required();
  r->add_option("--frequency", re.frequency, "low or high");
  r->add_option("--out", re.out, "Output image (.pgm)")->required();
  r->add_option("--blend", re.blend, "mean or feather");
  r->add_option("--width", re.width, "Image width (patch directories only)");
  r->add_option("--height", re.height, "Image height (patch directories only)");

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Assign pairs to cross-validation folds");
  sp.common.attach(split);
  sp.count_opt = split->add_option("--count", sp.count, "Number of pairs");
  split->add_option("--run", sp.run_dir, "Run directory (pairs are taken from it)");
  sp.k_opt = split->add_option("--k", sp.k, "Number of folds");
  split->add_option("--strata", sp.strata, "JSON array of stratum labels, one per pair");
  split->add_option("--out", sp.out, "Output path (default: stdout)");

  ExportArgs ex;
  auto* x = app.add_subcommand("export", "Write training patches and the fold manifest");
  ex.common.attach(x);
  x->add_option("run_dir", ex.run_dir, "Run directory written by simulate")->required();
  x->add_option("--out", ex.out, "Output directory")->required();
  ex.k_opt = x->add_option("--k", ex.k, "Number of folds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*e) return cmd_evaluate(ev);
    if (*score) return cmd_score(sc);
    if (*p) return cmd_patchify(pa);
    if (*r) return cmd_reconstruct(re);
    if (*split) return cmd_split(sp);
    if (*x) return cmd_export(ex);
  } catch (const ConfigError& err) {
    std::cerr << "eustwin: error: " << err.what() << "\n";
    return 2;
  } catch (const DataError& err) {
    std::cerr << "eustwin: error: " << err.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "eustwin: error: " << err.what() << "\n";
    return 3;
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"eustwin"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace eustwin::cli

#include "eustwin/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "eustwin/random.hpp"
#include "json.hpp"

namespace eustwin {

using nlohmann::json;

std::string to_string(Frequency f) { return f == Frequency::Low ? "low" : "high"; }

Frequency frequency_from_string(const std::string& s) {
  if (s == "low") return Frequency::Low;
  if (s == "high") return Frequency::High;
  throw ConfigError("frequency tag must be 'low' or 'high', got '" + s + "'");
}

std::vector<Eigen::Index> grid_origins(Eigen::Index extent, Eigen::Index size, Eigen::Index stride) {
  if (size <= 0 || stride <= 0) throw ConfigError("patch size and stride must be > 0");
  if (extent < size) throw DimensionMismatch("image is smaller than one patch");
  std::vector<Eigen::Index> origins;
  for (Eigen::Index o = 0; o + size <= extent; o += stride) origins.push_back(o);
  if (origins.back() + size < extent) origins.push_back(extent - size);
  return origins;
}

void PatchGrid::validate() const {
  if (patch_size <= 0 || stride_w <= 0 || stride_h <= 0) throw ConfigError("patch size and strides must be > 0");
  if (width < patch_size || height < patch_size) throw DimensionMismatch("image is smaller than one patch");
}

std::vector<Eigen::Index> PatchGrid::column_origins() const { return grid_origins(width, patch_size, stride_w); }
std::vector<Eigen::Index> PatchGrid::row_origins() const { return grid_origins(height, patch_size, stride_h); }

std::vector<std::pair<Eigen::Index, Eigen::Index>> PatchGrid::origins() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const auto cols = column_origins();
  for (auto r : row_origins())
    for (auto c : cols) out.emplace_back(c, r);
  return out;
}

PatchSet patchify(const Image& image, const PatchGrid& grid, const std::string& source_id,
                  Frequency frequency) {
  grid.validate();
  if (image.cols() != grid.width || image.rows() != grid.height) {
    std::ostringstream os;
    os << "image is " << image.cols() << "x" << image.rows() << ", grid expects " << grid.width << "x"
       << grid.height;
    throw DimensionMismatch(os.str());
  }
  PatchSet patches;
  for (const auto& [c, r] : grid.origins())
    patches.push_back({image.block(r, c, grid.patch_size, grid.patch_size), c, r, source_id, frequency});
  return patches;
}

PatchSet patchify(const ImagePair& pair, const PatchGrid& grid, const std::string& source_id) {
  pair.validate();
  PatchSet patches = patchify(pair.low.pixels, grid, source_id, Frequency::Low);
  PatchSet high = patchify(pair.high.pixels, grid, source_id, Frequency::High);
  patches.insert(patches.end(), std::make_move_iterator(high.begin()), std::make_move_iterator(high.end()));
  return patches;
}

Image reconstruct(const PatchSet& patches, const PatchGrid& grid, Frequency frequency, BlendMode blend) {
  grid.validate();
  std::set<std::pair<Eigen::Index, Eigen::Index>> expected;
  for (const auto& o : grid.origins()) expected.insert(o);

  const Eigen::Index size = grid.patch_size;
  Image value = Image::Zero(grid.height, grid.width);
  Image weight = Image::Zero(grid.height, grid.width);

  Eigen::VectorXd tent(size);
  for (Eigen::Index i = 0; i < size; ++i) tent[i] = static_cast<double>(std::min(i + 1, size - i));
  const Image tent2d = tent * tent.transpose();

  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  for (const auto& p : patches) {
    if (p.frequency != frequency) continue;
    const std::pair origin{p.col, p.row};
    if (!expected.count(origin)) throw DataError("patch origin is not on the grid");
    if (!seen.insert(origin).second) throw DataError("duplicate patch at a grid origin");
    if (p.pixels.rows() != size || p.pixels.cols() != size) throw DimensionMismatch("patch has the wrong size");

    auto v = value.block(p.row, p.col, size, size);
    auto w = weight.block(p.row, p.col, size, size);
    if (blend == BlendMode::Mean) {
      // Running mean: identical contributions reproduce the value exactly.
      w.array() += 1.0;
      v.array() += (p.pixels.array() - v.array()) / w.array();
    } else {
      w += tent2d;
      v += tent2d.cwiseProduct(p.pixels);
    }
  }
  if (seen.size() != expected.size()) {
    std::ostringstream os;
    os << "incomplete patch set: " << seen.size() << " of " << expected.size() << " "
       << to_string(frequency) << " patches present";
    throw IncompleteError(os.str());
  }
  if (blend == BlendMode::Feather) value.array() /= weight.array();
  return value;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++out[static_cast<std::size_t>(f)];
  return out;
}

std::vector<std::size_t> FoldAssignment::members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

FoldAssignment split_folds(std::size_t n, int k, std::uint64_t seed,
                           const std::optional<std::vector<int>>& strata) {
  if (k < 1) throw ConfigError("fold count must be >= 1");
  if (n < static_cast<std::size_t>(k)) throw ConfigError("need at least as many pairs as folds");
  if (strata && strata->size() != n) throw ConfigError("strata labels must cover every pair");

  Engine engine = make_engine(seed, "folds");
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(engine, i)]);
  };

  std::vector<std::size_t> order;
  if (!strata) {
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order);
  } else {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[(*strata)[i]].push_back(i);
    for (auto& [label, members] : groups) {
      shuffle(members);
      order.insert(order.end(), members.begin(), members.end());
    }
  }

  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of.assign(n, 0);
  // The n mod k leftover pairs all go to fold 0, the rest are dealt round-robin.
  const std::size_t extra = n % static_cast<std::size_t>(k);
  for (std::size_t j = extra; j < n; ++j)
    folds.fold_of[order[j]] = static_cast<int>((j - extra) % static_cast<std::size_t>(k));
  return folds;
}

// ---------------------------------------------------------------------------
// Files

std::string patch_file_name(const std::string& source_id, Eigen::Index col, Eigen::Index row,
                            Frequency frequency) {
  std::ostringstream os;
  os << source_id << "_" << col << "x" << row << "_" << to_string(frequency) << ".pgm";
  return os.str();
}

std::optional<Patch> parse_patch_file_name(const std::string& file_name) {
  static const std::regex pattern(R"(^(.+)_(\d+)x(\d+)_(low|high)\.pgm$)");
  std::smatch m;
  if (!std::regex_match(file_name, m, pattern)) return std::nullopt;
  Patch p;
  p.source_id = m[1].str();
  p.col = std::stol(m[2].str());
  p.row = std::stol(m[3].str());
  p.frequency = frequency_from_string(m[4].str());
  return p;
}

namespace {

json grid_to_json(const PatchGrid& g) {
  return {{"patch_size", g.patch_size}, {"stride_w", g.stride_w}, {"stride_h", g.stride_h},
          {"width", g.width}, {"height", g.height}};
}

PatchGrid grid_from_json(const json& j) {
  PatchGrid g;
  g.patch_size = j.at("patch_size").get<Eigen::Index>();
  g.stride_w = j.at("stride_w").get<Eigen::Index>();
  g.stride_h = j.at("stride_h").get<Eigen::Index>();
  g.width = j.at("width").get<Eigen::Index>();
  g.height = j.at("height").get<Eigen::Index>();
  return g;
}

}  // namespace

std::string manifest_to_json(const Manifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json patches = json::array();
    for (const auto& p : e.patches)
      patches.push_back({{"col", p.col}, {"row", p.row}, {"low", p.low}, {"high", p.high}});
    entries.push_back({{"source_id", e.source_id}, {"fold", e.fold}, {"seed", e.seed}, {"patches", patches}});
  }
  const json doc = {{"format", "eustwin-manifest"},
                    {"version", 1},
                    {"grid", grid_to_json(manifest.grid)},
                    {"pixel_format", "pgm8"},
                    {"k", manifest.k},
                    {"fold_seed", manifest.fold_seed},
                    {"root_seed", manifest.root_seed},
                    {"pairs", entries}};
  return doc.dump(2);
}

Manifest manifest_from_json(const std::string& text) {
  Manifest m;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "eustwin-manifest") throw DataError("not a manifest document");
    if (doc.at("version").get<int>() != 1) throw DataError("unsupported manifest version");
    m.grid = grid_from_json(doc.at("grid"));
    m.k = doc.at("k").get<int>();
    m.fold_seed = doc.value("fold_seed", std::uint64_t{0});
    m.root_seed = doc.value("root_seed", std::uint64_t{0});
    for (const auto& e : doc.at("pairs")) {
      ManifestEntry entry;
      entry.source_id = e.at("source_id").get<std::string>();
      entry.fold = e.at("fold").get<int>();
      entry.seed = e.value("seed", std::uint64_t{0});
      for (const auto& p : e.at("patches"))
        entry.patches.push_back({p.at("col").get<Eigen::Index>(), p.at("row").get<Eigen::Index>(),
                                 p.at("low").get<std::string>(), p.at("high").get<std::string>()});
      if (entry.fold < 0 || entry.fold >= m.k) throw DataError("fold id out of range for " + entry.source_id);
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

Manifest export_for_training(const std::vector<NamedPair>& pairs, const FoldAssignment& folds,
                             const PatchGrid& grid, const std::filesystem::path& out_dir,
                             std::uint64_t root_seed) {
  if (folds.fold_of.size() != pairs.size())
    throw DataError("fold assignment does not cover the exported pairs");
  Manifest manifest;
  manifest.grid = grid;
  manifest.k = folds.k;
  manifest.fold_seed = folds.seed;
  manifest.root_seed = root_seed;

  std::filesystem::create_directories(out_dir);
  if (!pairs.empty()) std::filesystem::create_directories(out_dir / "patches");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    if (!ids.insert(pair.source_id).second) throw DataError("duplicate source id " + pair.source_id);
    const PatchSet patches = patchify(pair.images, grid, pair.source_id);
    ManifestEntry entry{pair.source_id, folds.fold_of[i], pair.seed, {}};
    const std::size_t per_image = patches.size() / 2;
    for (std::size_t j = 0; j < per_image; ++j) {
      const Patch& lo = patches[j];
      const Patch& hi = patches[j + per_image];
      const std::string lo_name = "patches/" + patch_file_name(lo.source_id, lo.col, lo.row, Frequency::Low);
      const std::string hi_name = "patches/" + patch_file_name(hi.source_id, hi.col, hi.row, Frequency::High);
      write_pgm(out_dir / lo_name, lo.pixels, pair.images.low.meta.ceiling);
      write_pgm(out_dir / hi_name, hi.pixels, pair.images.high.meta.ceiling);
      entry.patches.push_back({lo.col, lo.row, lo_name, hi_name});
    }
    manifest.entries.push_back(std::move(entry));
  }
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + out_dir.string());
  out << manifest_to_json(manifest) << "\n";
  return manifest;
}

PatchSet import_patches(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  PatchSet patches;
  for (const auto& e : m.entries) {
    if (e.patches.size() != m.grid.origins().size())
      throw IncompleteError("manifest lists an incomplete patch set for " + e.source_id);
    for (const auto& p : e.patches) {
      for (auto [file, freq] : {std::pair{p.low, Frequency::Low}, std::pair{p.high, Frequency::High}}) {
        Image px = read_pgm(base / file);
        if (px.rows() != m.grid.patch_size || px.cols() != m.grid.patch_size)
          throw DimensionMismatch(file + " does not match the manifest patch size");
        patches.push_back({std::move(px), p.col, p.row, e.source_id, freq});
      }
    }
  }
  return patches;
}

}  // namespace eustwin

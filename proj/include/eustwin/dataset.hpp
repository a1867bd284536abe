#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eustwin/imaging.hpp"

namespace eustwin {

enum class Frequency { Low, High };

std::string to_string(Frequency f);
Frequency frequency_from_string(const std::string& s);

struct PatchGrid {
  Eigen::Index patch_size = 256;
  Eigen::Index stride_w = 180;
  Eigen::Index stride_h = 248;
  Eigen::Index width = kDatasetWidth;
  Eigen::Index height = kDatasetHeight;

  void validate() const;
  std::vector<Eigen::Index> column_origins() const;
  std::vector<Eigen::Index> row_origins() const;
  /// (col, row) origins, row-major: rows outer, columns inner.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> origins() const;
};

/// 0, s, 2s, ... while the patch fits; if the last patch stops short of the
/// edge, one more origin clamped to extent - size.
std::vector<Eigen::Index> grid_origins(Eigen::Index extent, Eigen::Index size, Eigen::Index stride);

struct Patch {
  Image pixels;
  Eigen::Index col = 0;
  Eigen::Index row = 0;
  std::string source_id;
  Frequency frequency = Frequency::Low;
};

using PatchSet = std::vector<Patch>;

/// Patches of one image in grid order.
PatchSet patchify(const Image& image, const PatchGrid& grid, const std::string& source_id,
                  Frequency frequency);

/// Low patches followed by high patches with matching origins.
PatchSet patchify(const ImagePair& pair, const PatchGrid& grid, const std::string& source_id);

enum class BlendMode {
  Mean,     // unweighted average of overlapping patches
  Feather,  // tent weights falling off toward each patch edge
};

/// Reassemble the `frequency` patches of `patches` onto the grid. Every grid
/// origin must be present exactly once (IncompleteError otherwise).
Image reconstruct(const PatchSet& patches, const PatchGrid& grid, Frequency frequency,
                  BlendMode blend = BlendMode::Mean);

struct FoldAssignment {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<int> fold_of;  // per pair index

  std::vector<std::size_t> sizes() const;
  std::vector<std::size_t> members(int fold) const;
};

/// Random permutation split into k folds: every fold gets floor(n/k) pairs and
/// fold 0 also takes the n mod k leftovers (442 pairs -> 90, 88, 88, 88, 88).
/// With `strata`, each stratum is shuffled separately and the strata are dealt
/// one after another.
FoldAssignment split_folds(std::size_t n, int k, std::uint64_t seed,
                           const std::optional<std::vector<int>>& strata = std::nullopt);

struct ManifestPatch {
  Eigen::Index col = 0;
  Eigen::Index row = 0;
  std::string low;   // file path relative to the manifest
  std::string high;
};

struct ManifestEntry {
  std::string source_id;
  int fold = 0;
  std::uint64_t seed = 0;
  std::vector<ManifestPatch> patches;
};

struct Manifest {
  PatchGrid grid;
  int k = 5;
  std::uint64_t fold_seed = 0;
  std::uint64_t root_seed = 0;
  std::vector<ManifestEntry> entries;
};

struct NamedPair {
  std::string source_id;
  ImagePair images;
  std::uint64_t seed = 0;
};

/// Patch files `<id>_<col>x<row>_<low|high>.pgm` under out_dir/patches and
/// out_dir/manifest.json. Pairs are checked for alignment first.
Manifest export_for_training(const std::vector<NamedPair>& pairs, const FoldAssignment& folds,
                             const PatchGrid& grid, const std::filesystem::path& out_dir,
                             std::uint64_t root_seed = 0);

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);
Manifest read_manifest(const std::filesystem::path& path);

/// Reload every patch listed in a manifest; checks sizes against the grid.
PatchSet import_patches(const std::filesystem::path& manifest_path);

std::string patch_file_name(const std::string& source_id, Eigen::Index col, Eigen::Index row,
                            Frequency frequency);

/// Parse `<id>_<col>x<row>_<freq>.pgm`; nothing if the name does not match.
std::optional<Patch> parse_patch_file_name(const std::string& file_name);

}  // namespace eustwin

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eustwin/acoustics.hpp"
#include "eustwin/dataset.hpp"
#include "eustwin/metrics.hpp"
#include "eustwin/phantom.hpp"
#include "eustwin/scanner.hpp"

namespace eustwin {

enum class PhantomKind { Wire, Tissue, File };

struct PhantomConfig {
  PhantomKind kind = PhantomKind::Wire;
  std::vector<double> wire_depths = default_wire_depths();  // m below the window start
  double density = 10.0;                                    // scatterers per resolution cell
  std::vector<AnechoicRegion> anechoic;
  std::filesystem::path path;                               // kind == File
};

struct RunConfig {
  std::uint64_t seed = 0;
  int pairs = 1;
  std::filesystem::path output = "run";
  double noise_sigma = 0.01;
  double dynamic_range = 50.0;  // dB
  double ceiling = 255.0;
  TransducerSpec low = low_frequency_preset();
  TransducerSpec high = high_frequency_preset();
  ProbeGeometry geometry;
  std::optional<Medium> medium;  // unset: water for wires, tissue otherwise
  PhantomConfig phantom;
  PatchGrid grid;
  int folds = 5;
  int ssim_window = 7;
  PeakMode peak = PeakMode::Ceiling;

  Medium effective_medium() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parse a JSON config. Unknown keys and wrongly typed values are rejected with
/// the dotted path of the field in the message.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, every field present.
std::string config_to_json(const RunConfig& config);

std::string to_string(PhantomKind kind);

}  // namespace eustwin

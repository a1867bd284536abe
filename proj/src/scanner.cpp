#include "eustwin/scanner.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "eustwin/error.hpp"

namespace eustwin {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kCullFwhms = 3.0;

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// Per-transducer constants of the echo model.
struct EchoModel {
  const TransducerSpec& spec;
  const Medium& medium;
  const ProbeGeometry& geometry;
  double sigma;
  double omega;
  double samples;

  EchoModel(const TransducerSpec& s, const Medium& m, const ProbeGeometry& g)
      : spec(s), medium(m), geometry(g), sigma(pulse_sigma(s)),
        omega(2.0 * std::numbers::pi * s.center_frequency),
        samples(static_cast<double>(g.rf_samples_per_line(m.sound_speed))) {}
};

// One scatterer's contribution before the lateral weight: its echo restricted
// to the RF samples it touches, and where its lines are.
struct Echo {
  Eigen::Index first = 0;
  Eigen::VectorXd samples;
  double range = 0.0;
  double offset = 0.0;  // angle relative to roi_start, radians, in [span/2 - pi, span/2 + pi]
  double reach = 0.0;   // lateral cull distance
  double beam_fwhm = 0.0;
};

bool make_echo(const EchoModel& model, const Scatterer& s, Echo& echo) {
  const double range = s.position.norm();
  if (!(range > 0.0) || s.reflectivity == 0.0) return false;
  const auto& g = model.geometry;
  const double fs = g.rf_sample_rate;
  const double delay = 2.0 * (range - g.start_range) / model.medium.sound_speed;
  const double half = 4.0 * model.sigma;
  const double lo = std::max(std::ceil((delay - half) * fs), 0.0);
  const double hi = std::min(std::floor((delay + half) * fs), model.samples - 1.0);
  if (hi < lo) return false;

  echo.first = static_cast<Eigen::Index>(lo);
  echo.samples.resize(static_cast<Eigen::Index>(hi - lo) + 1);
  const double amplitude = s.reflectivity * attenuation_factor(model.spec, range, model.medium);
  for (Eigen::Index i = 0; i < echo.samples.size(); ++i) {
    const double t = static_cast<double>(echo.first + i) / fs - delay;
    echo.samples[i] =
        amplitude * std::exp(-t * t / (2.0 * model.sigma * model.sigma)) * std::cos(model.omega * t);
  }
  const double theta = std::atan2(-s.position.x(), -s.position.y());
  const double half_span = g.roi_span * kDeg / 2.0;
  echo.offset = wrap_pi(theta - g.roi_center * kDeg) + half_span;
  echo.range = range;
  echo.beam_fwhm = lateral_beam_fwhm(model.spec, range, model.medium);
  echo.reach = kCullFwhms * echo.beam_fwhm;
  return true;
}

// Lateral weight of `echo` on line k, or 0 when culled.
double line_weight(const ProbeGeometry& g, const Echo& echo, int k) {
  const double delta = echo.offset - g.line_offset(k);
  if (std::cos(delta) <= 0.0) return 0.0;
  const double lateral = echo.range * std::sin(delta);
  if (std::abs(lateral) > echo.reach) return 0.0;
  return std::exp(-4.0 * std::numbers::ln2 * lateral * lateral / (echo.beam_fwhm * echo.beam_fwhm));
}

void add_noise(Eigen::Ref<Eigen::VectorXd> line, double noise_sigma, Engine& rng) {
  if (noise_sigma <= 0.0) return;
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  for (Eigen::Index i = 0; i < line.size(); ++i) line[i] += gauss(rng);
}

void check_rate(const TransducerSpec& spec, const ProbeGeometry& geometry) {
  spec.validate();
  if (!(geometry.rf_sample_rate >= 4.0 * spec.center_frequency)) {
    std::ostringstream os;
    os << "rf_sample_rate " << geometry.rf_sample_rate << " Hz is below 4 x "
       << spec.center_frequency << " Hz";
    throw UndersamplingError(os.str());
  }
}

// ---- little-endian helpers
template <typename T>
void put(std::ostream& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bits;
  if (!in.read(reinterpret_cast<char*>(bits.data()), sizeof(T)))
    throw DataError("truncated RF frame file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

constexpr char kRfMagic[4] = {'E', 'U', 'R', 'F'};
constexpr std::uint32_t kRfVersion = 1;

}  // namespace

void ProbeGeometry::validate() const {
  if (!(roi_span > 0.0 && roi_span < 360.0)) throw ConfigError("roi_span must lie in (0, 360)");
  if (scanlines_per_frame < 2) throw ConfigError("scanlines_per_frame must be >= 2");
  if (!(rf_sample_rate > 0.0)) throw ConfigError("rf_sample_rate must be > 0");
  if (!(depth > 0.0)) throw ConfigError("depth must be > 0");
  if (!(start_range >= 0.0)) throw ConfigError("start_range must be >= 0");
  if (!(rotation_speed > 0.0)) throw ConfigError("rotation_speed must be > 0");
  if (phase_offset != 180.0) throw ConfigError("phase_offset must be 180 for the dual-element probe");
}

Eigen::Index ProbeGeometry::rf_samples_per_line(double sound_speed) const {
  return static_cast<Eigen::Index>(std::ceil(2.0 * depth / sound_speed * rf_sample_rate));
}

double ProbeGeometry::line_offset(int k) const {
  if (k == scanlines_per_frame - 1) return roi_span * kDeg;
  return k * (roi_span / (scanlines_per_frame - 1)) * kDeg;
}

Point ScanlineRay::direction() const {
  return Point(-std::sin(angle * kDeg), -std::cos(angle * kDeg));
}

std::vector<double> scanline_angles(const ProbeGeometry& geometry) {
  geometry.validate();
  std::vector<double> angles(static_cast<std::size_t>(geometry.scanlines_per_frame));
  const double step = geometry.roi_span / (geometry.scanlines_per_frame - 1);
  for (int k = 0; k < geometry.scanlines_per_frame; ++k)
    angles[static_cast<std::size_t>(k)] = geometry.roi_start() + k * step;
  angles.back() = geometry.roi_start() + geometry.roi_span;
  return angles;
}

std::vector<ScanlineRay> scanline_rays(const ProbeGeometry& geometry) {
  const auto angles = scanline_angles(geometry);
  std::vector<ScanlineRay> rays;
  rays.reserve(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k)
    rays.push_back({static_cast<int>(k), angles[k], Point::Zero()});
  return rays;
}

double RFFrame::line_angle(int k) const {
  return geometry.roi_start() + geometry.line_offset(k) / kDeg;
}

void PairedRFFrame::verify_alignment() const {
  const auto n = static_cast<int>(alignment.line_angles.size());
  if (low.data.rows() != n || high.data.rows() != n)
    throw DataError("paired frames do not cover the recorded scanlines");
  for (int k = 0; k < n; ++k)
    if (low.line_angle(k) != alignment.line_angles[static_cast<std::size_t>(k)] ||
        high.line_angle(k) != alignment.line_angles[static_cast<std::size_t>(k)])
      throw DataError("paired frames disagree on the angle of line " + std::to_string(k));
}

Engine line_noise_engine(std::uint64_t seed, const TransducerSpec& spec, int line) {
  return make_engine(seed, spec.mount == Mount::Top ? "rf-noise/top" : "rf-noise/bottom",
                     static_cast<std::uint64_t>(line));
}

Eigen::VectorXd synthesize_rf_line(const PhantomDef& phantom, const TransducerSpec& spec,
                                   const ScanlineRay& ray, const ProbeGeometry& geometry,
                                   double noise_sigma, Engine& rng) {
  check_rate(spec, geometry);
  if (ray.index < 0 || ray.index >= geometry.scanlines_per_frame)
    throw ConfigError("scanline index out of range");
  const EchoModel model(spec, phantom.medium, geometry);
  Eigen::VectorXd line = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.samples));
  Echo echo;
  for (const auto& s : phantom.point_scatterers()) {
    if (!make_echo(model, s, echo)) continue;
    const double w = line_weight(geometry, echo, ray.index);
    if (w == 0.0) continue;
    line.segment(echo.first, echo.samples.size()) += w * echo.samples;
  }
  add_noise(line, noise_sigma, rng);
  return line;
}

RFFrame synthesize_frame(const PhantomDef& phantom, const TransducerSpec& spec,
                         const ProbeGeometry& geometry, double noise_sigma, std::uint64_t seed) {
  check_rate(spec, geometry);
  geometry.validate();
  const EchoModel model(spec, phantom.medium, geometry);
  const int lines = geometry.scanlines_per_frame;

  RFFrame frame;
  frame.transducer_id = spec.id;
  frame.sample_rate = geometry.rf_sample_rate;
  frame.sound_speed = phantom.medium.sound_speed;
  frame.geometry = geometry;
  frame.data = RFMatrix::Zero(lines, static_cast<Eigen::Index>(model.samples));

  const double step = geometry.roi_span / (lines - 1) * kDeg;
  Echo echo;
  for (const auto& s : phantom.point_scatterers()) {
    if (!make_echo(model, s, echo)) continue;
    const double spread =
        echo.reach >= echo.range ? std::numbers::pi / 2.0 : std::asin(echo.reach / echo.range);
    const int k0 = std::max(0, static_cast<int>(std::floor((echo.offset - spread) / step)) - 1);
    const int k1 = std::min(lines - 1, static_cast<int>(std::ceil((echo.offset + spread) / step)) + 1);
    for (int k = k0; k <= k1; ++k) {
      const double w = line_weight(geometry, echo, k);
      if (w == 0.0) continue;
      frame.data.row(k).segment(echo.first, echo.samples.size()) += w * echo.samples.transpose();
    }
  }
  if (noise_sigma > 0.0) {
    for (int k = 0; k < lines; ++k) {
      Engine rng = line_noise_engine(seed, spec, k);
      Eigen::VectorXd line = frame.data.row(k).transpose();
      add_noise(line, noise_sigma, rng);
      frame.data.row(k) = line.transpose();
    }
  }
  return frame;
}

PairedRFFrame simulate_pair(const PhantomDef& phantom, const ProbeGeometry& geometry,
                            const TransducerSpec& low_spec, const TransducerSpec& high_spec,
                            double noise_sigma, std::uint64_t seed) {
  if (low_spec.mount != Mount::Top || high_spec.mount != Mount::Bottom)
    throw ConfigError("mount mismatch: the low-frequency element must be top mounted and the "
                      "high-frequency element bottom mounted");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  PairedRFFrame pair;
  pair.low = synthesize_frame(phantom, low_spec, geometry, noise_sigma, seed);
  pair.high = synthesize_frame(phantom, high_spec, geometry, noise_sigma, seed);
  pair.alignment.line_angles.resize(static_cast<std::size_t>(geometry.scanlines_per_frame));
  for (int k = 0; k < geometry.scanlines_per_frame; ++k)
    pair.alignment.line_angles[static_cast<std::size_t>(k)] = pair.low.line_angle(k);
  pair.alignment.low_mount_phase = mount_phase_degrees(low_spec.mount);
  pair.alignment.high_mount_phase = mount_phase_degrees(high_spec.mount);
  pair.verify_alignment();
  return pair;
}

// ---------------------------------------------------------------------------
// Binary format

void write_rf_frame(const std::filesystem::path& path, const RFFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& g = frame.geometry;
  out.write(kRfMagic, 4);
  put<std::uint32_t>(out, kRfVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frame.data.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frame.data.cols()));
  put<double>(out, frame.sample_rate);
  put<double>(out, frame.sound_speed);
  put<double>(out, g.start_range);
  put<double>(out, g.depth);
  put<double>(out, g.roi_center);
  put<double>(out, g.roi_span);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frame.transducer_id.size()));
  out.write(frame.transducer_id.data(), static_cast<std::streamsize>(frame.transducer_id.size()));
  for (Eigen::Index r = 0; r < frame.data.rows(); ++r)
    for (Eigen::Index c = 0; c < frame.data.cols(); ++c)
      put<float>(out, static_cast<float>(frame.data(r, c)));
  if (!out) throw DataError("failed writing " + path.string());
}

RFFrame read_rf_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open RF frame " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kRfMagic, 4) != 0)
    throw DataError(path.string() + " is not an RF frame");
  if (get<std::uint32_t>(in) != kRfVersion) throw DataError("unsupported RF frame version");
  RFFrame frame;
  const auto lines = get<std::uint32_t>(in);
  const auto samples = get<std::uint32_t>(in);
  frame.sample_rate = get<double>(in);
  frame.sound_speed = get<double>(in);
  frame.geometry.start_range = get<double>(in);
  frame.geometry.depth = get<double>(in);
  frame.geometry.roi_center = get<double>(in);
  frame.geometry.roi_span = get<double>(in);
  frame.geometry.rf_sample_rate = frame.sample_rate;
  frame.geometry.scanlines_per_frame = static_cast<int>(lines);
  const auto id_length = get<std::uint32_t>(in);
  if (id_length > 4096) throw DataError("corrupt RF frame header");
  frame.transducer_id.resize(id_length);
  if (!in.read(frame.transducer_id.data(), id_length)) throw DataError("truncated RF frame file");
  frame.data.resize(lines, samples);
  for (Eigen::Index r = 0; r < frame.data.rows(); ++r)
    for (Eigen::Index c = 0; c < frame.data.cols(); ++c) frame.data(r, c) = get<float>(in);
  return frame;
}

}  // namespace eustwin

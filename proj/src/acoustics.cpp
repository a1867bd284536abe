#include "eustwin/acoustics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "eustwin/error.hpp"

namespace eustwin {

namespace {

// 2 sqrt(2 ln 2): FWHM of a unit-sigma Gaussian.
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

template <typename E>
[[noreturn]] void fail(const std::string& field, double value, const char* what) {
  std::ostringstream os;
  os << field << " = " << value << ": " << what;
  throw E(os.str());
}

}  // namespace

double mount_phase_degrees(Mount mount) { return mount == Mount::Top ? 0.0 : 180.0; }

void Medium::validate() const {
  if (!(sound_speed > 0.0)) fail<InvalidSpecError>("sound_speed", sound_speed, "must be > 0");
  if (!(attenuation_coeff >= 0.0))
    fail<InvalidSpecError>("attenuation_coeff", attenuation_coeff, "must be >= 0");
}

Medium tissue_medium() { return Medium{1540.0, 0.5}; }
Medium water_medium() { return Medium{1540.0, 0.0022}; }

void TransducerSpec::validate() const {
  if (!(center_frequency > 0.0))
    fail<InvalidSpecError>("center_frequency", center_frequency, "must be > 0");
  if (!(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0))
    fail<InvalidSpecError>("fractional_bandwidth", fractional_bandwidth, "must lie in (0, 2)");
  if (!(focal_depth > 0.0)) fail<InvalidSpecError>("focal_depth", focal_depth, "must be > 0");
  if (!(aperture_diameter > 0.0))
    fail<InvalidSpecError>("aperture_diameter", aperture_diameter, "must be > 0");
}

TransducerSpec low_frequency_preset() {
  return TransducerSpec{"low", 5.1e6, 0.52, 0.020, 3e-3, Mount::Top};
}

TransducerSpec high_frequency_preset() {
  return TransducerSpec{"high", 18.3e6, 0.51, 0.020, 3e-3, Mount::Bottom};
}

double pulse_sigma(const TransducerSpec& spec) {
  // Spectral amplitude is Gaussian with sigma_f = 1 / (2 pi sigma_t); its
  // half-amplitude full width must equal fBW f0.
  return kFwhmPerSigma /
         (2.0 * std::numbers::pi * spec.fractional_bandwidth * spec.center_frequency);
}

double pulse_envelope_fwhm(const TransducerSpec& spec) { return kFwhmPerSigma * pulse_sigma(spec); }

double pulse_envelope(const TransducerSpec& spec, double t) {
  const double s = pulse_sigma(spec);
  return std::exp(-t * t / (2.0 * s * s));
}

PulseWaveform make_pulse(const TransducerSpec& spec, double sample_rate) {
  spec.validate();
  if (!(sample_rate >= 4.0 * spec.center_frequency))
    fail<UndersamplingError>("sample_rate", sample_rate, "must be >= 4 x center frequency");

  const double sigma = pulse_sigma(spec);
  const auto half = static_cast<Eigen::Index>(std::floor(4.0 * sigma * sample_rate));
  PulseWaveform pulse;
  pulse.sample_rate = sample_rate;
  pulse.t0_index = half;
  pulse.samples.resize(2 * half + 1);
  const double w0 = 2.0 * std::numbers::pi * spec.center_frequency;
  for (Eigen::Index i = 0; i < pulse.samples.size(); ++i) {
    const double t = pulse.time_at(i);
    pulse.samples[i] = std::exp(-t * t / (2.0 * sigma * sigma)) * std::cos(w0 * t);
  }
  return pulse;
}

double axial_psf_fwhm(const TransducerSpec& spec, const Medium& medium) {
  return medium.sound_speed * pulse_envelope_fwhm(spec) / 2.0;
}

double lateral_beam_fwhm(const TransducerSpec& spec, double depth, const Medium& medium) {
  if (!(depth > 0.0)) fail<ConfigError>("depth", depth, "must be > 0");
  const double focal_width = spec.wavelength(medium) * spec.focal_depth / spec.aperture_diameter;
  const double defocus = (depth - spec.focal_depth) / spec.focal_depth;
  return focal_width * std::sqrt(1.0 + defocus * defocus);
}

double attenuation_factor(const TransducerSpec& spec, double depth, const Medium& medium) {
  if (!(depth >= 0.0)) fail<ConfigError>("depth", depth, "must be >= 0");
  const double loss_db =
      medium.attenuation_coeff * (spec.center_frequency * 1e-6) * 2.0 * (depth * 100.0);
  return std::pow(10.0, -loss_db / 20.0);
}

double psf_amplitude(const TransducerSpec& spec, double axial_offset, double lateral_offset,
                     double depth, const Medium& medium) {
  const double w = lateral_beam_fwhm(spec, depth, medium);
  const double axial = pulse_envelope(spec, 2.0 * axial_offset / medium.sound_speed);
  const double lateral =
      std::exp(-4.0 * std::numbers::ln2 * lateral_offset * lateral_offset / (w * w));
  return axial * lateral;
}

double resolution_cell_area(const TransducerSpec& spec, const Medium& medium) {
  return lateral_beam_fwhm(spec, spec.focal_depth, medium) * axial_psf_fwhm(spec, medium);
}

}  // namespace eustwin

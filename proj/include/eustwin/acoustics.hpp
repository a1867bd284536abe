#pragma once

#include <Eigen/Core>
#include <string>

namespace eustwin {

// Which side of the geared reflector the element sits on. Top elements see the
// image plane at 0 deg rotational phase, Bottom elements at 180 deg.
enum class Mount { Top, Bottom };

double mount_phase_degrees(Mount mount);

struct Medium {
  double sound_speed = 1540.0;       // m/s
  double attenuation_coeff = 0.5;    // dB/(cm MHz)

  void validate() const;
  bool operator==(const Medium&) const = default;
};

Medium tissue_medium();
Medium water_medium();

struct TransducerSpec {
  std::string id;
  double center_frequency = 0.0;      // Hz
  double fractional_bandwidth = 0.0;  // -6 dB amplitude bandwidth / center frequency
  double focal_depth = 0.0;           // m
  double aperture_diameter = 0.0;     // m
  Mount mount = Mount::Top;

  void validate() const;
  double wavelength(const Medium& medium) const {
    return medium.sound_speed / center_frequency;
  }
};

/// 5.1 MHz element, 52 % bandwidth, top mounted.
TransducerSpec low_frequency_preset();
/// 18.3 MHz element, 51 % bandwidth, bottom mounted.
TransducerSpec high_frequency_preset();

struct PulseWaveform {
  Eigen::VectorXd samples;  // peak-normalized
  double sample_rate = 0.0;
  Eigen::Index t0_index = 0;

  double time_at(Eigen::Index i) const {
    return static_cast<double>(i - t0_index) / sample_rate;
  }
};

/// Gaussian envelope width (seconds) whose amplitude spectrum has the spec's
/// -6 dB fractional bandwidth.
double pulse_sigma(const TransducerSpec& spec);

/// Full width at half maximum of the pulse envelope, seconds.
double pulse_envelope_fwhm(const TransducerSpec& spec);

/// Envelope of the emitted pulse at time t (1 at t = 0, no truncation).
double pulse_envelope(const TransducerSpec& spec, double t);

/// Gaussian-modulated cosine, truncated at +-4 sigma. Throws UndersamplingError
/// when sample_rate < 4 f0, InvalidSpecError on an invalid spec.
PulseWaveform make_pulse(const TransducerSpec& spec, double sample_rate);

/// Axial (range) FWHM of the point spread function, c * envelope FWHM / 2.
double axial_psf_fwhm(const TransducerSpec& spec, const Medium& medium);

/// Depth-dependent lateral beam width w(z) = w_f sqrt(1 + ((z - F)/F)^2),
/// w_f = lambda F / D.
double lateral_beam_fwhm(const TransducerSpec& spec, double depth, const Medium& medium);

/// Round-trip amplitude loss 10^(-alpha f_MHz 2 z_cm / 20).
double attenuation_factor(const TransducerSpec& spec, double depth, const Medium& medium);

/// Separable point spread function: pulse envelope at 2 axial_offset / c times
/// a lateral Gaussian of FWHM lateral_beam_fwhm(depth).
double psf_amplitude(const TransducerSpec& spec, double axial_offset, double lateral_offset,
                     double depth, const Medium& medium);

/// Lateral FWHM at the focus times axial FWHM; the unit for scatterer densities.
double resolution_cell_area(const TransducerSpec& spec, const Medium& medium);

}  // namespace eustwin

#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include "ose/grid.hpp"
#include "ose/surface.hpp"

namespace ose {

struct SensorSpec {
  std::size_t px_w = 512;
  std::size_t px_h = 512;
  double px_pitch = 5.70e-3 / 2560.0;  ///< meters
  int bit_depth = 8;

  std::uint32_t full_scale() const noexcept { return (1u << bit_depth) - 1u; }
};

/// One illumination/capture setup.
struct OpticalConfig {
  double lambda = 650e-9;      ///< wavelength, meters
  double theta_inc = 0.0;      ///< incidence angle, radians
  double aperture_d = 5.0e-3;  ///< lens aperture diameter D, meters
  double dist_z = 75e-3;       ///< lens-to-observation-plane distance z, meters
  SensorSpec sensor;
  double illum_power_scale = 1.0;

  void validate() const;
};

/// Stable 16-hex-digit digest of the setup geometry (wavelength, angle,
/// aperture, distance, sensor). Exposure is not part of the setup identity.
std::string config_fingerprint(const OpticalConfig& config);

/// Quantized sensor image. Counts lie in [0, 2^bit_depth - 1].
class SpecklePattern {
 public:
  static constexpr std::size_t kMinSize = 16;

  SpecklePattern() = default;
  SpecklePattern(Grid<std::uint16_t> counts, int bit_depth, std::string fingerprint);

  std::size_t width() const noexcept { return counts_.width(); }
  std::size_t height() const noexcept { return counts_.height(); }
  int bit_depth() const noexcept { return bit_depth_; }
  const Grid<std::uint16_t>& counts() const noexcept { return counts_; }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

  Image to_image() const;

  friend bool operator==(const SpecklePattern&, const SpecklePattern&) = default;

 private:
  Grid<std::uint16_t> counts_;
  int bit_depth_ = 8;
  std::string fingerprint_;
};

/// Placement of the sample in front of the sensor. The captured image content
/// appears rotated by `rotation` (radians) and translated by the offsets (meters).
struct Pose {
  double offset_x = 0.0;
  double offset_y = 0.0;
  double rotation = 0.0;
};

/// Intensity on a regular grid in the observation plane (unit magnification).
struct IntensityField {
  Image values;
  double pitch = 0.0;
};

/// Unit-amplitude reflected field with phase 4*pi*h*cos(theta)/lambda.
Grid<std::complex<double>> reflection_phase(const HeightMap& map, double lambda, double theta_inc);

/// Aperture-limited imaging of a field sampled at `pitch`: forward transform,
/// circular pupil of cutoff D / (2 lambda z), inverse transform, |.|^2.
IntensityField pupil_image(Grid<std::complex<double>> field, double pitch, const OpticalConfig& config);

/// Throws ConfigError if the expected speckle is smaller than two sensor pixels
/// or two surface samples.
void check_sampling(const OpticalConfig& config, double surface_pitch);

/// Pre-quantization intensity of `map` under `config`, on the surface grid.
IntensityField simulate_intensity(const HeightMap& map, const OpticalConfig& config);

/// Camera model: bilinear resample onto the sensor window centred on the
/// field, mean scaled to 25% of full scale times `exposure`, Gaussian read
/// noise of one count, reflect-at-zero, clip and quantize.
SpecklePattern sensor_capture(const IntensityField& field, const SensorSpec& sensor, double exposure,
                              std::uint64_t noise_seed, const Pose& pose = {});

SpecklePattern simulate_speckle(const HeightMap& map, const OpticalConfig& config,
                                std::uint64_t noise_seed, const Pose& pose = {});

/// 1.22 * lambda * z / D, meters.
double expected_speckle_diameter(const OpticalConfig& config);

/// FWHM of the normalized autocovariance central lobe, pixels (mean of the
/// horizontal and vertical cuts).
double measured_speckle_diameter(const Image& image);
double measured_speckle_diameter(const SpecklePattern& pattern);

/// A holographic fake of `genuine` recorded at `enroll`, replayed at `challenge`.
/// Replay scales the stored phase by lambda_enroll / lambda_challenge and
/// magnifies transverse coordinates by lambda_challenge / lambda_enroll.
SpecklePattern simulate_hologram_copy(const HeightMap& genuine, const OpticalConfig& enroll,
                                      const OpticalConfig& challenge, std::uint64_t noise_seed,
                                      const Pose& pose = {});

/// std / mean.
double speckle_contrast(const Image& intensity);

}  // namespace ose

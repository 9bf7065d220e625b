#include "ose/optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "ose/digest.hpp"
#include "ose/error.hpp"
#include "ose/fft.hpp"
#include "ose/random.hpp"

namespace ose {
namespace {

using Complex = std::complex<double>;

double bilinear(const Image& g, double u, double v) {
  const auto x0 = static_cast<std::size_t>(std::floor(u));
  const auto y0 = static_cast<std::size_t>(std::floor(v));
  const std::size_t x1 = std::min(x0 + 1, g.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, g.height() - 1);
  const double fx = u - static_cast<double>(x0);
  const double fy = v - static_cast<double>(y0);
  const double top = g(x0, y0) * (1.0 - fx) + g(x1, y0) * fx;
  const double bottom = g(x0, y1) * (1.0 - fx) + g(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

double clamped_bilinear(const Image& g, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(g.width() - 1));
  v = std::clamp(v, 0.0, static_cast<double>(g.height() - 1));
  return bilinear(g, u, v);
}

}  // namespace

void OpticalConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("optics: lambda must be > 0");
  if (!(theta_inc >= 0.0 && theta_inc < std::numbers::pi / 2))
    throw InvalidArgument("optics: theta_inc must lie in [0, pi/2)");
  if (!(aperture_d > 0.0) || !std::isfinite(aperture_d))
    throw InvalidArgument("optics: aperture_d must be > 0");
  if (!(dist_z > 0.0) || !std::isfinite(dist_z)) throw InvalidArgument("optics: dist_z must be > 0");
  if (sensor.px_w < SpecklePattern::kMinSize || sensor.px_h < SpecklePattern::kMinSize)
    throw InvalidArgument("optics: sensor must be at least 16x16 pixels");
  if (!(sensor.px_pitch > 0.0)) throw InvalidArgument("optics: sensor pixel pitch must be > 0");
  if (sensor.bit_depth != 8 && sensor.bit_depth != 12 && sensor.bit_depth != 16)
    throw InvalidArgument("optics: bit_depth must be 8, 12 or 16");
  if (!(illum_power_scale > 0.0) || !std::isfinite(illum_power_scale))
    throw InvalidArgument("optics: illum_power_scale must be > 0");
}

std::string config_fingerprint(const OpticalConfig& c) {
  // Canonical form in the sidecar units, so configurations read back from a
  // sidecar fingerprint identically to the ones that wrote it.
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "lambda_nm=%.10g;theta_deg=%.10g;aperture_mm=%.10g;z_mm=%.10g;px_w=%zu;px_h=%zu;"
                "px_pitch_um=%.10g;bit_depth=%d",
                c.lambda * 1e9, c.theta_inc * 180.0 / std::numbers::pi, c.aperture_d * 1e3, c.dist_z * 1e3,
                c.sensor.px_w, c.sensor.px_h, c.sensor.px_pitch * 1e6, c.sensor.bit_depth);
  return sha256_hex(std::string_view(buf)).substr(0, 16);
}

SpecklePattern::SpecklePattern(Grid<std::uint16_t> counts, int bit_depth, std::string fingerprint)
    : counts_(std::move(counts)), bit_depth_(bit_depth), fingerprint_(std::move(fingerprint)) {
  if (bit_depth_ != 8 && bit_depth_ != 12 && bit_depth_ != 16)
    throw InvalidArgument("speckle pattern: bit_depth must be 8, 12 or 16");
  if (counts_.width() < kMinSize || counts_.height() < kMinSize)
    throw InvalidArgument("speckle pattern: must be at least 16x16");
  const auto full = (1u << bit_depth_) - 1u;
  for (auto v : counts_)
    if (v > full) throw InvalidArgument("speckle pattern: count exceeds quantization range");
}

Image SpecklePattern::to_image() const {
  Image out(width(), height());
  std::transform(counts_.begin(), counts_.end(), out.begin(),
                 [](std::uint16_t v) { return static_cast<double>(v); });
  return out;
}

Grid<Complex> reflection_phase(const HeightMap& map, double lambda, double theta_inc) {
  if (!(lambda > 0.0)) throw InvalidArgument("reflection_phase: lambda must be > 0");
  if (!(theta_inc >= 0.0 && theta_inc < std::numbers::pi / 2))
    throw InvalidArgument("reflection_phase: theta_inc must lie in [0, pi/2)");
  const double k = 4.0 * std::numbers::pi * std::cos(theta_inc) / lambda;
  Grid<Complex> field(map.width(), map.height());
  const auto& h = map.heights();
  for (std::size_t i = 0; i < h.size(); ++i) field.data()[i] = std::polar(1.0, k * h.data()[i]);
  return field;
}

IntensityField pupil_image(Grid<Complex> field, double pitch, const OpticalConfig& config) {
  const std::size_t w = field.width();
  const std::size_t h = field.height();
  const double fc = config.aperture_d / (2.0 * config.lambda * config.dist_z);
  const double fc2 = fc * fc;

  fft::forward(field);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(fft::signed_bin(y, h)) / (static_cast<double>(h) * pitch);
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(fft::signed_bin(x, w)) / (static_cast<double>(w) * pitch);
      if (fx * fx + fy * fy > fc2) field(x, y) = 0.0;
    }
  }
  fft::inverse(field);

  IntensityField out{Image(w, h), pitch};
  for (std::size_t i = 0; i < field.size(); ++i) out.values.data()[i] = std::norm(field.data()[i]);
  return out;
}

double expected_speckle_diameter(const OpticalConfig& config) {
  return 1.22 * config.lambda * config.dist_z / config.aperture_d;
}

void check_sampling(const OpticalConfig& config, double surface_pitch) {
  config.validate();
  const double d = expected_speckle_diameter(config);
  std::ostringstream os;
  if (d < 2.0 * config.sensor.px_pitch) {
    os << "speckle diameter " << d * 1e6 << " um is below two sensor pixels (px_pitch "
       << config.sensor.px_pitch * 1e6 << " um); increase lambda or z, or reduce aperture_d ("
       << config.aperture_d * 1e3 << " mm)";
    throw ConfigError(os.str());
  }
  if (d < 2.0 * surface_pitch) {
    os << "speckle diameter " << d * 1e6 << " um is below two surface samples (pitch "
       << surface_pitch * 1e6 << " um); refine the surface grid or reduce aperture_d ("
       << config.aperture_d * 1e3 << " mm)";
    throw ConfigError(os.str());
  }
}

IntensityField simulate_intensity(const HeightMap& map, const OpticalConfig& config) {
  check_sampling(config, map.pitch());
  return pupil_image(reflection_phase(map, config.lambda, config.theta_inc), map.pitch(), config);
}

SpecklePattern sensor_capture(const IntensityField& field, const SensorSpec& sensor, double exposure,
                              std::uint64_t noise_seed, const Pose& pose) {
  if (field.values.empty() || !(field.pitch > 0.0)) throw InvalidArgument("sensor_capture: empty field");
  if (!(exposure >= 0.0)) throw InvalidArgument("sensor_capture: exposure must be >= 0");
  const Image& src = field.values;
  const double cx = 0.5 * static_cast<double>(src.width() - 1);
  const double cy = 0.5 * static_cast<double>(src.height() - 1);
  const double sx = 0.5 * static_cast<double>(sensor.px_w - 1);
  const double sy = 0.5 * static_cast<double>(sensor.px_h - 1);
  const double scale = sensor.px_pitch / field.pitch;
  const double c = std::cos(pose.rotation);
  const double s = std::sin(pose.rotation);
  const double ox = pose.offset_x / field.pitch;
  const double oy = pose.offset_y / field.pitch;

  Image sampled(sensor.px_w, sensor.px_h);
  const double max_u = static_cast<double>(src.width() - 1);
  const double max_v = static_cast<double>(src.height() - 1);
  for (std::size_t j = 0; j < sensor.px_h; ++j) {
    for (std::size_t i = 0; i < sensor.px_w; ++i) {
      // Sensor pixel -> field coordinates: inverse rotation, then offset.
      const double px = (static_cast<double>(i) - sx) * scale - ox;
      const double py = (static_cast<double>(j) - sy) * scale - oy;
      const double u = c * px + s * py + cx;
      const double v = -s * px + c * py + cy;
      if (u < 0.0 || v < 0.0 || u > max_u || v > max_v)
        throw ConfigError("sensor footprint exceeds the simulated surface; enlarge the surface grid");
      const double val = bilinear(src, u, v);
      if (val < 0.0) throw InvalidArgument("sensor_capture: negative intensity");
      sampled(i, j) = val;
    }
  }

  double mean = 0.0;
  for (double v : sampled) mean += v;
  mean /= static_cast<double>(sampled.size());

  const double full = static_cast<double>(sensor.full_scale());
  const double gain = mean > 0.0 ? 0.25 * full * exposure / mean : 0.0;

  std::mt19937_64 rng(derive_seed(noise_seed, {0x5e11u}));
  std::normal_distribution<double> read_noise(0.0, 1.0);
  Grid<std::uint16_t> counts(sensor.px_w, sensor.px_h);
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    double v = gain * sampled.data()[k] + read_noise(rng);
    if (v < 0.0) v = -v;
    counts.data()[k] = static_cast<std::uint16_t>(std::min(std::round(v), full));
  }
  return SpecklePattern(std::move(counts), sensor.bit_depth, {});
}

SpecklePattern simulate_speckle(const HeightMap& map, const OpticalConfig& config,
                                std::uint64_t noise_seed, const Pose& pose) {
  auto pattern =
      sensor_capture(simulate_intensity(map, config), config.sensor, config.illum_power_scale, noise_seed, pose);
  pattern.set_fingerprint(config_fingerprint(config));
  return pattern;
}

double measured_speckle_diameter(const Image& image) {
  if (image.width() < 4 || image.height() < 4)
    throw DegenerateInput("measured_speckle_diameter: image too small");
  double mean = 0.0;
  for (double v : image) mean += v;
  mean /= static_cast<double>(image.size());
  Image d(image.width(), image.height());
  double var = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    d.data()[i] = image.data()[i] - mean;
    var += d.data()[i] * d.data()[i];
  }
  var /= static_cast<double>(image.size());
  if (!(var > 0.0)) throw DegenerateInput("measured_speckle_diameter: constant image");

  // Unbiased autocovariance along one axis, normalized to 1 at lag 0.
  auto lag_corr = [&](std::size_t k, bool along_x) {
    double s = 0.0;
    std::size_t n = 0;
    const std::size_t w = d.width() - (along_x ? k : 0);
    const std::size_t h = d.height() - (along_x ? 0 : k);
    for (std::size_t y = 0; y < h; ++y) {
      const auto r0 = d.row(y);
      const auto r1 = d.row(along_x ? y : y + k);
      const std::size_t off = along_x ? k : 0;
      for (std::size_t x = 0; x < w; ++x) s += r0[x] * r1[x + off];
      n += w;
    }
    return s / static_cast<double>(n) / var;
  };

  auto half_width = [&](bool along_x) {
    const std::size_t max_lag = (along_x ? d.width() : d.height()) / 2;
    double prev = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
      const double cur = lag_corr(k, along_x);
      if (cur < 0.5) return static_cast<double>(k - 1) + (prev - 0.5) / (prev - cur);
      prev = cur;
    }
    throw DegenerateInput("measured_speckle_diameter: autocovariance never drops to half maximum");
  };

  return half_width(true) + half_width(false);
}

double measured_speckle_diameter(const SpecklePattern& pattern) {
  return measured_speckle_diameter(pattern.to_image());
}

SpecklePattern simulate_hologram_copy(const HeightMap& genuine, const OpticalConfig& enroll,
                                      const OpticalConfig& challenge, std::uint64_t noise_seed,
                                      const Pose& pose) {
  enroll.validate();
  check_sampling(challenge, genuine.pitch());

  Grid<Complex> field;
  if (config_fingerprint(enroll) == config_fingerprint(challenge)) {
    field = reflection_phase(genuine, enroll.lambda, enroll.theta_inc);
  } else {
    const double ratio = enroll.lambda / challenge.lambda;  // phase scale; 1/magnification
    const double k = 4.0 * std::numbers::pi * std::cos(enroll.theta_inc) / enroll.lambda * ratio;
    const Image& h = genuine.heights();
    const double cx = 0.5 * static_cast<double>(h.width() - 1);
    const double cy = 0.5 * static_cast<double>(h.height() - 1);
    field = Grid<Complex>(h.width(), h.height());
    for (std::size_t y = 0; y < h.height(); ++y) {
      const double v = cy + (static_cast<double>(y) - cy) * ratio;
      for (std::size_t x = 0; x < h.width(); ++x) {
        const double u = cx + (static_cast<double>(x) - cx) * ratio;
        field(x, y) = std::polar(1.0, k * clamped_bilinear(h, u, v));
      }
    }
  }
  auto pattern = sensor_capture(pupil_image(std::move(field), genuine.pitch(), challenge), challenge.sensor,
                                challenge.illum_power_scale, noise_seed, pose);
  pattern.set_fingerprint(config_fingerprint(challenge));
  return pattern;
}

double speckle_contrast(const Image& intensity) {
  if (intensity.empty()) throw DegenerateInput("speckle_contrast: empty image");
  double s = 0.0, s2 = 0.0;
  for (double v : intensity) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(intensity.size());
  const double mean = s / n;
  if (!(mean > 0.0)) throw DegenerateInput("speckle_contrast: non-positive mean");
  const double var = std::max(0.0, s2 / n - mean * mean);
  return std::sqrt(var) / mean;
}

}  // namespace ose

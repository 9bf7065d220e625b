#include "ose/pattern_io.hpp"

#include <fstream>
#include <numbers>

#include "ose/error.hpp"
#include "ose/png_io.hpp"

namespace ose {

nlohmann::json config_to_json(const OpticalConfig& c) {
  return {
      {"lambda_nm", c.lambda * 1e9},
      {"theta_deg", c.theta_inc * 180.0 / std::numbers::pi},
      {"aperture_mm", c.aperture_d * 1e3},
      {"z_mm", c.dist_z * 1e3},
      {"px_pitch_um", c.sensor.px_pitch * 1e6},
      {"bit_depth", c.sensor.bit_depth},
      {"px_w", c.sensor.px_w},
      {"px_h", c.sensor.px_h},
      {"illum_power_scale", c.illum_power_scale},
      {"fingerprint", config_fingerprint(c)},
  };
}

OpticalConfig config_from_json(const nlohmann::json& j) {
  OpticalConfig c;
  try {
    c.lambda = j.at("lambda_nm").get<double>() * 1e-9;
    c.theta_inc = j.at("theta_deg").get<double>() * std::numbers::pi / 180.0;
    c.aperture_d = j.at("aperture_mm").get<double>() * 1e-3;
    c.dist_z = j.at("z_mm").get<double>() * 1e-3;
    c.sensor.px_pitch = j.at("px_pitch_um").get<double>() * 1e-6;
    c.sensor.bit_depth = j.at("bit_depth").get<int>();
    c.sensor.px_w = j.at("px_w").get<std::size_t>();
    c.sensor.px_h = j.at("px_h").get<std::size_t>();
    c.illum_power_scale = j.value("illum_power_scale", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("optical config JSON: ") + e.what());
  }
  c.validate();
  if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != config_fingerprint(c))
    throw InvalidArgument("optical config JSON: fingerprint does not match the recorded parameters");
  return c;
}

std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  auto p = png_path;
  return p.replace_extension(".json");
}

void write_pattern(const std::filesystem::path& png_path, const SpecklePattern& pattern,
                   const OpticalConfig& config) {
  if (pattern.fingerprint() != config_fingerprint(config))
    throw InvalidArgument("write_pattern: pattern fingerprint does not match the configuration");
  if (pattern.width() != config.sensor.px_w || pattern.height() != config.sensor.px_h ||
      pattern.bit_depth() != config.sensor.bit_depth)
    throw InvalidArgument("write_pattern: pattern geometry does not match the sensor");
  png::write_gray16(png_path, pattern.counts());
  const auto side = sidecar_path(png_path);
  std::ofstream os(side, std::ios::trunc);
  if (!os) throw IoError(side, "cannot open for writing");
  os << config_to_json(config).dump(2) << '\n';
  if (!os) throw IoError(side, "write failed");
}

StoredPattern read_pattern(const std::filesystem::path& png_path) {
  const auto side = sidecar_path(png_path);
  std::ifstream is(side);
  if (!is) throw IoError(side, "missing pattern sidecar");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(side, e.what());
  }
  OpticalConfig config;
  try {
    config = config_from_json(j);
  } catch (const InvalidArgument& e) {
    throw IoError(side, e.what());
  }
  auto counts = png::read_gray16(png_path);
  if (counts.width() != config.sensor.px_w || counts.height() != config.sensor.px_h)
    throw IoError(png_path, "image size does not match the sidecar");
  try {
    return {SpecklePattern(std::move(counts), config.sensor.bit_depth, config_fingerprint(config)), config};
  } catch (const InvalidArgument& e) {
    throw IoError(png_path, e.what());
  }
}

}  // namespace ose

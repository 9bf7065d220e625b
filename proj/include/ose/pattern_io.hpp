#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ose/optics.hpp"

namespace ose {

struct StoredPattern {
  SpecklePattern pattern;
  OpticalConfig config;
};

/// Sidecar fields: lambda_nm, theta_deg, aperture_mm, z_mm, px_pitch_um,
/// bit_depth, fingerprint, px_w, px_h, illum_power_scale.
nlohmann::json config_to_json(const OpticalConfig& config);
OpticalConfig config_from_json(const nlohmann::json& j);

/// `<stem>.json` next to the PNG.
std::filesystem::path sidecar_path(const std::filesystem::path& png_path);

/// Writes the 16-bit PNG and its JSON sidecar. The pattern's fingerprint must
/// match `config`.
void write_pattern(const std::filesystem::path& png_path, const SpecklePattern& pattern,
                   const OpticalConfig& config);

/// Reads a PNG and its sidecar; the recorded fingerprint is checked against
/// the recorded configuration.
StoredPattern read_pattern(const std::filesystem::path& png_path);

}  // namespace ose

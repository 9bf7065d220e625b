#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ose/grid.hpp"

namespace ose {

/// Statistics of a random relief: Gaussian autocovariance
/// C(r) = sigma_h^2 * exp(-r^2 / corr_len^2).
struct SurfaceParams {
  double sigma_h = 500e-9;   ///< RMS roughness, meters
  double corr_len = 10e-6;   ///< 1/e autocovariance length, meters
  std::uint64_t seed = 0;

  void validate() const;
};

/// Where a height map came from. Carried in memory only; the OSEH file
/// format stores geometry and heights.
struct Provenance {
  std::optional<SurfaceParams> surface;
  std::vector<std::string> history;
};

/// Gridded surface relief. Heights and pitch in meters.
class HeightMap {
 public:
  HeightMap() = default;
  HeightMap(Image heights, double pitch, Provenance provenance = {});

  std::size_t width() const noexcept { return heights_.width(); }
  std::size_t height() const noexcept { return heights_.height(); }
  double pitch() const noexcept { return pitch_; }
  const Image& heights() const noexcept { return heights_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  bool empty() const noexcept { return heights_.empty(); }

  double rms() const;
  double mean() const;

 private:
  Image heights_;
  double pitch_ = 0.0;
  Provenance provenance_;
};

/// Zero-mean, unit-RMS stationary Gaussian random field with Gaussian
/// autocovariance of 1/e length `corr_len`. Synthesized oversized by one
/// correlation length on every side and cropped, so the circular wrap of the
/// spectral filter does not reach the returned window.
Image gaussian_field(std::size_t width, std::size_t height, double pitch, double corr_len,
                     std::uint64_t seed);

HeightMap generate_surface(const SurfaceParams& params, std::size_t width, std::size_t height,
                           double pitch);

struct ReplicaParams {
  double error_rms = 0.0;          ///< RMS of the height error, meters
  std::optional<double> corr_len;  ///< error correlation length; one pitch if unset
  std::uint64_t seed = 0;
  /// Share of the error variance carried by an extra one-pitch (near white)
  /// component on top of the `corr_len` component. 0 gives a single-scale error.
  double fine_fraction = 0.0;
};

/// Master plus an independent zero-mean height-error field with sample RMS
/// exactly `error_rms`.
HeightMap make_replica(const HeightMap& master, const ReplicaParams& params);

struct Rect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;
};

/// Full-height strip at the left edge covering `fraction` of the width.
struct Fraction {
  double value = 0.0;
};

using Region = std::variant<Rect, Fraction>;

enum class Fill { flat, random };

struct OcclusionParams {
  Region region = Fraction{0.0};
  Fill fill = Fill::flat;
  std::uint64_t seed = 0;
  /// Statistics for Fill::random; taken from the map's provenance if unset.
  std::optional<SurfaceParams> fill_surface;
};

HeightMap occlude(const HeightMap& map, const OcclusionParams& params);

/// Resolve a region against a grid, validating bounds.
Rect resolve_region(const Region& region, std::size_t width, std::size_t height);

// OSEH file format: "OSEH", u16 version, u32 nx, u32 ny, f64 pitch,
// nx*ny f32 heights, row-major little-endian.
inline constexpr std::uint16_t kHeightMapVersion = 1;

std::vector<unsigned char> encode_heightmap(const HeightMap& map);
HeightMap decode_heightmap(std::span<const unsigned char> bytes);
void write_heightmap(const std::filesystem::path& path, const HeightMap& map);
HeightMap read_heightmap(const std::filesystem::path& path);

}  // namespace ose

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ose/correlation.hpp"
#include "ose/optics.hpp"
#include "ose/surface.hpp"

namespace ose {

/// Desk-scale simulation setup: surface grid, replica error model, optics and
/// matching parameters shared by the experiment drivers and the CLI.
struct DeskScale {
  std::size_t grid = 1280;
  double pitch = 1e-6;
  SurfaceParams surface{500e-9, 4e-6, 0};
  double replica_error_rms = 65e-9;  ///< lambda / 10 at 650 nm
  double replica_error_corr = 150e-6;
  double replica_fine_fraction = 0.01;
  OpticalConfig optics;
  RotationSearch search;
  /// Placement tolerance of each capture: uniform in +-max_offset (meters, per
  /// axis) and +-max_rotation (radians).
  double max_offset = 0.0;
  double max_rotation = 0.0;

  ReplicaParams replica(std::uint64_t seed, double error_rms) const;
  ReplicaParams replica(std::uint64_t seed) const { return replica(seed, replica_error_rms); }
  Pose placement(std::uint64_t seed) const;
};

struct Table1Result {
  std::array<std::string, 4> labels{"1a", "1b", "2c", "2d"};
  std::array<std::array<CorrelationResult, 4>, 4> results{};
  CorrelationMap same_surface_map;   ///< 1a vs 1b at the winning rotation
  CorrelationMap cross_surface_map;  ///< 1a vs 2c at the winning rotation
  double seconds = 0.0;

  double peak(std::size_t i, std::size_t j) const { return results[i][j].peak; }
  double min_same() const;
  double max_cross() const;
  bool diagonal_is_unity(double tol = 1e-9) const;
  bool pass(double same_min = 0.80, double cross_max = 0.15) const;
};

/// Two masters, two replicas of each, one capture per replica, all pairwise
/// peak correlations. Off-diagonal entries are computed once per unordered
/// pair (i < j) and mirrored.
Table1Result run_table1(const DeskScale& desk, std::uint64_t seed);

/// Writes matrix.csv, heatmap_same.{csv,png}, heatmap_cross.{csv,png} and
/// report.json; returns the written paths.
std::vector<std::filesystem::path> write_table1_report(const std::filesystem::path& out_dir,
                                                       const Table1Result& result);

struct CurvePoint {
  double error_rms = 0.0;
  double mean_score = 0.0;
  double min_score = 0.0;
  double max_score = 0.0;
};

/// Mean same-master peak score of replica pairs versus replica error RMS.
std::vector<CurvePoint> decorrelation_curve(const DeskScale& desk, std::span<const double> error_levels,
                                            std::size_t trials, std::uint64_t seed);

}  // namespace ose

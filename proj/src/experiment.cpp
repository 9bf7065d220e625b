#include "ose/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "ose/error.hpp"
#include "ose/heatmap.hpp"
#include "ose/random.hpp"

namespace fs = std::filesystem;

namespace ose {

ReplicaParams DeskScale::replica(std::uint64_t seed, double error_rms) const {
  ReplicaParams p;
  p.error_rms = error_rms;
  p.corr_len = replica_error_corr;
  p.fine_fraction = replica_fine_fraction;
  p.seed = seed;
  return p;
}

Pose DeskScale::placement(std::uint64_t seed) const {
  if (max_offset == 0.0 && max_rotation == 0.0) return {};
  std::mt19937_64 rng(derive_seed(seed, {0x90u}));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Pose p;
  p.offset_x = max_offset * u(rng);
  p.offset_y = max_offset * u(rng);
  p.rotation = max_rotation * u(rng);
  return p;
}

double Table1Result::min_same() const { return std::min(peak(0, 1), peak(2, 3)); }

double Table1Result::max_cross() const {
  return std::max({peak(0, 2), peak(0, 3), peak(1, 2), peak(1, 3)});
}

bool Table1Result::diagonal_is_unity(double tol) const {
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(peak(i, i) - 1.0) > tol) return false;
  return true;
}

bool Table1Result::pass(double same_min, double cross_max) const {
  return diagonal_is_unity() && min_same() >= same_min && max_cross() <= cross_max;
}

Table1Result run_table1(const DeskScale& desk, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<SpecklePattern> patterns;
  for (std::uint64_t m = 0; m < 2; ++m) {
    SurfaceParams sp = desk.surface;
    sp.seed = derive_seed(seed, {1, m});
    const HeightMap master = generate_surface(sp, desk.grid, desk.grid, desk.pitch);
    for (std::uint64_t r = 0; r < 2; ++r) {
      const HeightMap replica = make_replica(master, desk.replica(derive_seed(seed, {2, m, r})));
      const std::uint64_t capture = derive_seed(seed, {3, m, r});
      patterns.push_back(simulate_speckle(replica, desk.optics, capture, desk.placement(capture)));
    }
  }

  Table1Result out;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      auto match = search_rotations(patterns[i].to_image(), patterns[j].to_image(), desk.search);
      out.results[i][j] = match.result;
      out.results[j][i] = match.result;
      if (i == 0 && j == 1) out.same_surface_map = std::move(match.map);
      if (i == 0 && j == 2) out.cross_surface_map = std::move(match.map);
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<fs::path> write_table1_report(const fs::path& out_dir, const Table1Result& result) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create output directory: " + ec.message());
  std::vector<fs::path> written;

  const fs::path matrix = out_dir / "matrix.csv";
  {
    std::ofstream os(matrix, std::ios::trunc);
    if (!os) throw IoError(matrix, "cannot open for writing");
    os << "pair";
    for (const auto& l : result.labels) os << ',' << l;
    os << '\n';
    char buf[64];
    for (std::size_t i = 0; i < 4; ++i) {
      os << result.labels[i];
      for (std::size_t j = 0; j < 4; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", result.peak(i, j));
        os << ',' << buf;
      }
      os << '\n';
    }
    if (!os) throw IoError(matrix, "write failed");
  }
  written.push_back(matrix);

  for (const auto& [name, map] : {std::pair{"heatmap_same", &result.same_surface_map},
                                  std::pair{"heatmap_cross", &result.cross_surface_map}}) {
    for (auto [ext, fmt] : {std::pair{".csv", HeatmapFormat::csv}, std::pair{".png", HeatmapFormat::png}}) {
      const fs::path p = out_dir / (std::string(name) + ext);
      export_heatmap(*map, p, fmt);
      written.push_back(p);
    }
    written.push_back(out_dir / (std::string(name) + ".json"));
  }

  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const auto& r = result.results[i][j];
      pairs.push_back({{"a", result.labels[i]},
                       {"b", result.labels[j]},
                       {"same_surface", (i < 2) == (j < 2)},
                       {"peak", r.peak},
                       {"dx", r.dx},
                       {"dy", r.dy},
                       {"rotation_deg", r.rotation * 180.0 / M_PI},
                       {"off_peak_mean", r.off_peak_mean},
                       {"off_peak_std", r.off_peak_std}});
    }
  const nlohmann::json report = {
      {"pairs", pairs},
      {"min_same_surface", result.min_same()},
      {"max_cross_surface", result.max_cross()},
      {"diagonal_unity", result.diagonal_is_unity()},
      {"bands", {{"same_surface_min", 0.80}, {"cross_surface_max", 0.15}}},
      {"pass", result.pass()},
  };
  const fs::path rp = out_dir / "report.json";
  std::ofstream os(rp, std::ios::trunc);
  if (!os) throw IoError(rp, "cannot open for writing");
  os << report.dump(2) << '\n';
  if (!os) throw IoError(rp, "write failed");
  written.push_back(rp);
  return written;
}

std::vector<CurvePoint> decorrelation_curve(const DeskScale& desk, std::span<const double> error_levels,
                                            std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidArgument("decorrelation_curve: trials must be > 0");
  std::vector<HeightMap> masters;
  for (std::size_t t = 0; t < trials; ++t) {
    SurfaceParams sp = desk.surface;
    sp.seed = derive_seed(seed, {10, t});
    masters.push_back(generate_surface(sp, desk.grid, desk.grid, desk.pitch));
  }
  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < error_levels.size(); ++k) {
    CurvePoint pt{error_levels[k], 0.0, 2.0, -2.0};
    for (std::size_t t = 0; t < trials; ++t) {
      // Replica error seeds do not depend on the level, so the curve varies
      // only through the error amplitude.
      const auto ra = make_replica(masters[t], desk.replica(derive_seed(seed, {11, t}), error_levels[k]));
      const auto rb = make_replica(masters[t], desk.replica(derive_seed(seed, {12, t}), error_levels[k]));
      const auto pa = simulate_speckle(ra, desk.optics, derive_seed(seed, {13, t}));
      const auto pb = simulate_speckle(rb, desk.optics, derive_seed(seed, {14, t}));
      const double s = match_with_rotation(pa, pb, desk.search).peak;
      pt.mean_score += s / static_cast<double>(trials);
      pt.min_score = std::min(pt.min_score, s);
      pt.max_score = std::max(pt.max_score, s);
    }
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace ose

#include "ose/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ose/error.hpp"

namespace ose {
namespace {

void write_sidecar(const CorrelationMap& map, const std::filesystem::path& path, double lo, double hi) {
  auto side = path;
  side.replace_extension(".json");
  const nlohmann::json j = {
      {"shift_range", {map.range().max_dx, map.range().max_dy}},
      {"rotation_rad", map.rotation()},
      {"rotation_deg", map.rotation() * 180.0 / M_PI},
      {"scale_min", lo},
      {"scale_max", hi},
  };
  std::ofstream os(side, std::ios::trunc);
  if (!os) throw IoError(side, "cannot open for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError(side, "write failed");
}

}  // namespace

png::Rgb colormap(double t) {
  // Anchors sampled from viridis.
  static constexpr std::array<std::array<double, 3>, 6> kStops{{
      {68, 1, 84}, {65, 68, 135}, {42, 120, 142}, {34, 168, 132}, {122, 209, 81}, {253, 231, 37}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double pos = t * static_cast<double>(kStops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), kStops.size() - 2);
  const double f = pos - static_cast<double>(i);
  auto lerp = [&](int c) {
    return static_cast<std::uint8_t>(std::lround(kStops[i][c] * (1.0 - f) + kStops[i + 1][c] * f));
  };
  return {lerp(0), lerp(1), lerp(2)};
}

void export_heatmap(const CorrelationMap& map, const std::filesystem::path& path, HeatmapFormat format) {
  const auto& values = map.values();
  if (values.empty()) throw InvalidArgument("export_heatmap: empty map");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const auto& r = map.range();

  if (format == HeatmapFormat::csv) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError(path, "cannot open for writing");
    os << "dx,dy,value\n";
    char buf[64];
    for (int dy = -r.max_dy; dy <= r.max_dy; ++dy)
      for (int dx = -r.max_dx; dx <= r.max_dx; ++dx) {
        std::snprintf(buf, sizeof buf, "%.17g", map.at(dx, dy));
        os << dx << ',' << dy << ',' << buf << '\n';
      }
    if (!os) throw IoError(path, "write failed");
  } else {
    Grid<png::Rgb> img(values.width(), values.height());
    const double span = hi - lo;
    for (std::size_t i = 0; i < values.size(); ++i)
      img.data()[i] = colormap(span > 0.0 ? (values.data()[i] - lo) / span : 0.5);
    png::write_rgb8(path, img);
  }
  write_sidecar(map, path, lo, hi);
}

CorrelationMap read_heatmap_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(is, line) || line != "dx,dy,value") throw IoError(path, "missing dx,dy,value header");
  struct Row {
    int dx, dy;
    double v;
  };
  std::vector<Row> rows;
  int mx = 0, my = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row row{};
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> row.dx >> c1 >> row.dy >> c2 >> row.v) || c1 != ',' || c2 != ',')
      throw IoError(path, "malformed row: " + line);
    mx = std::max(mx, std::abs(row.dx));
    my = std::max(my, std::abs(row.dy));
    rows.push_back(row);
  }
  const std::size_t expected = static_cast<std::size_t>((2 * mx + 1) * (2 * my + 1));
  if (rows.size() != expected) throw IoError(path, "incomplete shift grid");

  double rotation = 0.0;
  auto side = path;
  side.replace_extension(".json");
  if (std::ifstream js(side); js) {
    try {
      rotation = nlohmann::json::parse(js).value("rotation_rad", 0.0);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(side, e.what());
    }
  }
  CorrelationMap map({mx, my}, rotation);
  for (const auto& row : rows) map.at(row.dx, row.dy) = row.v;
  return map;
}

}  // namespace ose

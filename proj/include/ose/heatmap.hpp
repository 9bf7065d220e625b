#pragma once

#include <filesystem>

#include "ose/correlation.hpp"
#include "ose/png_io.hpp"

namespace ose {

enum class HeatmapFormat { csv, png };

/// CSV: header `dx,dy,value`, one row per shift (dy-major). PNG: one pixel per
/// shift, colour scale stretched to the map's own min/max. Both write a JSON
/// sidecar `<stem>.json` with shift_range, rotation and the scale limits.
void export_heatmap(const CorrelationMap& map, const std::filesystem::path& path, HeatmapFormat format);

/// Reads a CSV export back; rotation comes from the sidecar when present.
CorrelationMap read_heatmap_csv(const std::filesystem::path& path);

/// Perceptually ordered dark-to-bright colour map, t in [0, 1].
png::Rgb colormap(double t);

}  // namespace ose

#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ose/error.hpp"
#include "ose/heatmap.hpp"
#include "test_util.hpp"

using namespace ose;

namespace {

CorrelationMap autocorrelation_map() {
  const Image a = test::random_image(48, 48, 3);
  return correlate_shifts(a, a, ShiftRange::square(5));
}

}  // namespace

TEST(Heatmap, CsvRows) {
  test::TempDir dir;
  CorrelationMap m(ShiftRange::square(1), 0.01);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) m.at(dx, dy) = 0.1 * dx + 0.01 * dy;
  export_heatmap(m, dir / "m.csv", HeatmapFormat::csv);
  std::ifstream is(dir / "m.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "dx,dy,value");
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 9u);
}

TEST(Heatmap, CsvRoundTrip) {
  test::TempDir dir;
  const auto m = autocorrelation_map();
  export_heatmap(m, dir / "m.csv", HeatmapFormat::csv);
  const auto back = read_heatmap_csv(dir / "m.csv");
  ASSERT_EQ(back.range(), m.range());
  EXPECT_EQ(back.rotation(), m.rotation());
  for (std::size_t i = 0; i < m.values().size(); ++i) EXPECT_NEAR(back.values().data()[i], m.values().data()[i], 1e-9);
}

TEST(Heatmap, PngBrightestAtCentre) {
  test::TempDir dir;
  const auto m = autocorrelation_map();
  export_heatmap(m, dir / "m.png", HeatmapFormat::png);
  const auto img = png::read_rgb8(dir / "m.png");
  ASSERT_EQ(img.width(), 11u);
  ASSERT_EQ(img.height(), 11u);
  auto luma = [](const png::Rgb& c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; };
  std::size_t best = 0;
  for (std::size_t i = 1; i < img.size(); ++i)
    if (luma(img.data()[i]) > luma(img.data()[best])) best = i;
  EXPECT_EQ(best % 11, 5u);
  EXPECT_EQ(best / 11, 5u);
}

TEST(Heatmap, SidecarRecordsScale) {
  test::TempDir dir;
  const auto m = autocorrelation_map();
  export_heatmap(m, dir / "m.png", HeatmapFormat::png);
  std::ifstream is(dir / "m.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_NEAR(j.at("scale_max").get<double>(), 1.0, 1e-9);
  EXPECT_LT(j.at("scale_min").get<double>(), 0.2);
  EXPECT_EQ(j.at("shift_range").at(0).get<int>(), 5);
}

TEST(Heatmap, ColormapEndpoints) {
  const auto dark = colormap(0.0), bright = colormap(1.0);
  EXPECT_LT(dark.r + dark.g + dark.b, bright.r + bright.g + bright.b);
}

TEST(Heatmap, UnwritablePath) {
  EXPECT_THROW(export_heatmap(autocorrelation_map(), "/nonexistent/dir/m.csv", HeatmapFormat::csv), IoError);
}

#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ose/digest.hpp"
#include "ose/error.hpp"
#include "ose/pattern_io.hpp"
#include "ose/png_io.hpp"
#include "ose/surface.hpp"
#include "test_util.hpp"

using namespace ose;

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Png, Gray16RoundTrip) {
  test::TempDir dir;
  Grid<std::uint16_t> g(37, 19);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = static_cast<std::uint16_t>(i * 1777u);
  png::write_gray16(dir / "a.png", g);
  EXPECT_EQ(png::read_gray16(dir / "a.png"), g);
}

TEST(Png, RgbRoundTrip) {
  test::TempDir dir;
  Grid<png::Rgb> g(5, 3);
  for (std::size_t i = 0; i < g.size(); ++i)
    g.data()[i] = {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(3 * i), static_cast<std::uint8_t>(255 - i)};
  png::write_rgb8(dir / "c.png", g);
  EXPECT_EQ(png::read_rgb8(dir / "c.png"), g);
}

TEST(Png, MissingFile) { EXPECT_THROW(png::read_gray16("/nonexistent/x.png"), IoError); }

TEST(PatternFile, RoundTripWithSidecar) {
  test::TempDir dir;
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  OpticalConfig c = test::small_optics();
  c.lambda = 635e-9;
  c.theta_inc = 0.05;
  const SpecklePattern p = simulate_speckle(m, c, 2);
  write_pattern(dir / "p.png", p, c);
  const StoredPattern back = read_pattern(dir / "p.png");
  EXPECT_EQ(back.pattern, p);
  EXPECT_EQ(config_fingerprint(back.config), config_fingerprint(c));

  std::ifstream is(dir / "p.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_DOUBLE_EQ(j.at("lambda_nm").get<double>(), 635.0);
  EXPECT_DOUBLE_EQ(j.at("aperture_mm").get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(j.at("z_mm").get<double>(), 75.0);
  EXPECT_DOUBLE_EQ(j.at("px_pitch_um").get<double>(), 2.2265625);
  EXPECT_EQ(j.at("bit_depth").get<int>(), 8);
  EXPECT_EQ(j.at("fingerprint").get<std::string>(), p.fingerprint());
}

TEST(PatternFile, SixteenBitRoundTrip) {
  test::TempDir dir;
  OpticalConfig c = test::small_optics();
  c.sensor.bit_depth = 16;
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const SpecklePattern p = simulate_speckle(m, c, 2);
  write_pattern(dir / "p.png", p, c);
  EXPECT_EQ(read_pattern(dir / "p.png").pattern, p);
}

TEST(PatternFile, FingerprintMismatch) {
  test::TempDir dir;
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const OpticalConfig c = test::small_optics();
  OpticalConfig other = c;
  other.lambda = 670e-9;
  const SpecklePattern p = simulate_speckle(m, c, 2);
  EXPECT_THROW(write_pattern(dir / "p.png", p, other), InvalidArgument);

  write_pattern(dir / "p.png", p, c);
  std::ifstream is(dir / "p.json");
  auto j = nlohmann::json::parse(is);
  is.close();
  j["lambda_nm"] = 670.0;
  std::ofstream(dir / "p.json") << j.dump();
  EXPECT_THROW(read_pattern(dir / "p.png"), IoError);
}

TEST(PatternFile, MissingSidecar) {
  test::TempDir dir;
  png::write_gray16(dir / "p.png", Grid<std::uint16_t>(16, 16, 1));
  EXPECT_THROW(read_pattern(dir / "p.png"), IoError);
}

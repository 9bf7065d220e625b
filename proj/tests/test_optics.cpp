#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ose/correlation.hpp"
#include "ose/error.hpp"
#include "ose/optics.hpp"
#include "ose/surface.hpp"
#include "test_util.hpp"

using namespace ose;
using std::numbers::pi;

TEST(ReflectionPhase, FlatSurfaceZeroPhase) {
  const HeightMap flat(Image(8, 8, 0.0), 1e-6);
  for (const auto& v : reflection_phase(flat, 650e-9, 0.0)) EXPECT_EQ(v, std::complex<double>(1.0, 0.0));
}

TEST(ReflectionPhase, HalfWavelengthIsIdentity) {
  const HeightMap half(Image(8, 8, 650e-9 / 2.0), 1e-6);
  for (const auto& v : reflection_phase(half, 650e-9, 0.0)) {
    EXPECT_NEAR(v.real(), 1.0, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(ReflectionPhase, SixtyDegreesHalvesPhase) {
  const HeightMap m(Image(4, 4, 100e-9), 1e-6);
  const double phi0 = std::arg(reflection_phase(m, 650e-9, 0.0)(1, 1));
  const double phi60 = std::arg(reflection_phase(m, 650e-9, pi / 3.0)(1, 1));
  EXPECT_NEAR(phi0, 4.0 * pi * 100e-9 / 650e-9, 1e-12);
  EXPECT_NEAR(phi60, 0.5 * phi0, 1e-12);
}

TEST(ReflectionPhase, LinearInHeight) {
  const HeightMap m = generate_surface({500e-9, 10e-6, 3}, 32, 32, 2e-6);
  Image h3 = m.heights();
  for (auto& v : h3) v *= 3.0;
  const auto f1 = reflection_phase(m, 650e-9, 0.2);
  const auto f3 = reflection_phase(HeightMap(h3, 2e-6), 650e-9, 0.2);
  for (std::size_t i = 0; i < f1.size(); ++i) EXPECT_NEAR(std::abs(f3.data()[i] - std::pow(f1.data()[i], 3)), 0.0, 1e-9);
}

TEST(SpeckleSize, ExpectedDiameter) {
  OpticalConfig c;
  c.aperture_d = 5.9e-3;
  EXPECT_NEAR(expected_speckle_diameter(c), 10.08e-6, 0.005e-6);
  EXPECT_NEAR(expected_speckle_diameter(c) / (5.70e-3 / 2560.0), 4.5, 0.05);
  c.aperture_d *= 2.0;
  EXPECT_NEAR(expected_speckle_diameter(c), 5.04e-6, 0.005e-6);
}

// Circular Gaussian field through the ideal pupil: the intensity
// autocovariance is |2 J1(v) / v|^2, whose half maximum sits at v = 1.6163,
// so FWHM = 2 * 1.6163 / pi * lambda z / D = 0.8434 * (1.22 lambda z / D).
TEST(SpeckleSize, IdealPupilFwhm) {
  const double pitch = 0.5e-6;
  OpticalConfig c;
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 2; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> g;
    Grid<std::complex<double>> f(1024, 1024);
    for (auto& v : f) v = {g(rng), g(rng)};
    sum += measured_speckle_diameter(pupil_image(std::move(f), pitch, c).values) * pitch;
  }
  EXPECT_NEAR(sum / 2.0 / expected_speckle_diameter(c), 2.0 * 1.6163 / pi / 1.22, 0.01);
}

TEST(SpeckleSize, WhiteNoiseIsAboutOnePixel) {
  EXPECT_NEAR(measured_speckle_diameter(test::random_image(256, 256, 5)), 1.0, 0.1);
}

TEST(SpeckleSize, ConstantImageIsDegenerate) {
  EXPECT_THROW(measured_speckle_diameter(Image(64, 64, 3.0)), DegenerateInput);
}

TEST(Pupil, EnergyDoesNotIncrease) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, 256, 256, 1e-6);
  auto field = reflection_phase(m, 650e-9, 0.0);
  double before = 0.0;
  for (const auto& v : field) before += std::norm(v);
  const auto out = pupil_image(std::move(field), 1e-6, OpticalConfig{});
  double after = 0.0;
  for (double v : out.values) after += v;
  EXPECT_LE(after, before * (1.0 + 1e-12));
  EXPECT_GT(after, 0.0);
}

TEST(Simulate, Deterministic) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const auto c = test::small_optics();
  EXPECT_EQ(simulate_speckle(m, c, 9), simulate_speckle(m, c, 9));
  EXPECT_NE(simulate_speckle(m, c, 9), simulate_speckle(m, c, 10));
}

TEST(Simulate, FlatSurfaceHasNoSpeckle) {
  const HeightMap flat(Image(test::kSmallGrid, test::kSmallGrid, 0.0), 1e-6);
  const auto f = simulate_intensity(flat, test::small_optics());
  Image interior(f.values.width() / 2, f.values.height() / 2);
  for (std::size_t y = 0; y < interior.height(); ++y)
    for (std::size_t x = 0; x < interior.width(); ++x)
      interior(x, y) = f.values(x + f.values.width() / 4, y + f.values.height() / 4);
  EXPECT_LT(speckle_contrast(interior), 0.05);
}

TEST(Simulate, FullyDevelopedContrast) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 2}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  EXPECT_NEAR(speckle_contrast(simulate_intensity(m, test::small_optics()).values), 1.0, 0.1);
}

TEST(Simulate, NyquistGuard) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 1}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  auto c = test::small_optics();
  c.aperture_d = 20e-3;  // 2.97 um speckle, 1.3 sensor pixels
  EXPECT_THROW(simulate_speckle(m, c, 1), ConfigError);
  c.aperture_d = 5e-3;
  c.sensor.px_w = 1024;  // footprint wider than the surface
  EXPECT_THROW(simulate_speckle(m, c, 1), ConfigError);
}

TEST(Config, ValidatesInvariants) {
  OpticalConfig c;
  c.validate();
  c.theta_inc = pi / 2.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.sensor.bit_depth = 10;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, Fingerprint) {
  OpticalConfig a;
  EXPECT_EQ(config_fingerprint(a).size(), 16u);
  OpticalConfig b = a;
  b.illum_power_scale = 2.0;
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.lambda = 635e-9;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
  b = a;
  b.theta_inc = 0.1;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}

TEST(Sensor, DarkFrame) {
  const IntensityField dark{Image(600, 600, 0.0), 1e-6};
  const auto p = sensor_capture(dark, test::small_optics().sensor, 1.0, 3);
  std::size_t high = 0;
  for (auto v : p.counts()) high += v > 6;
  EXPECT_EQ(high, 0u);
}

TEST(Sensor, MeanAtQuarterScaleAndSaturation) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 3}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const auto field = simulate_intensity(m, test::small_optics());
  const auto sensor = test::small_optics().sensor;
  const Image img = sensor_capture(field, sensor, 1.0, 1).to_image();
  double mean = 0.0;
  for (double v : img) mean += v / static_cast<double>(img.size());
  EXPECT_NEAR(mean, 0.25 * 255.0, 2.0);

  std::size_t clipped1 = 0, clipped4 = 0;
  for (auto v : sensor_capture(field, sensor, 1.0, 1).counts()) clipped1 += v == 255;
  for (auto v : sensor_capture(field, sensor, 4.0, 1).counts()) clipped4 += v == 255;
  // Exponential intensity with the mean at a quarter of full scale clips
  // a fraction exp(-4) = 1.83% of pixels.
  EXPECT_NEAR(static_cast<double>(clipped1) / (256.0 * 256.0), std::exp(-4.0), 0.006);
  EXPECT_GT(clipped4, 10 * clipped1);
}

TEST(Sensor, SameFieldSameSeed) {
  const IntensityField f{test::random_image(600, 600, 2), 1e-6};
  const auto s = test::small_optics().sensor;
  EXPECT_EQ(sensor_capture(f, s, 1.0, 4), sensor_capture(f, s, 1.0, 4));
}

TEST(Hologram, ExactAtRecordingSetup) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 5}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const auto c = test::small_optics();
  EXPECT_EQ(simulate_hologram_copy(m, c, c, 7), simulate_speckle(m, c, 7));
  EXPECT_GE(zncc(simulate_hologram_copy(m, c, c, 7), simulate_speckle(m, c, 8)), 0.95);
}

TEST(Hologram, DecorrelatesAwayFromRecordingWavelength) {
  const HeightMap m = generate_surface({500e-9, 4e-6, 6}, test::kSmallGrid, test::kSmallGrid, 1e-6);
  const auto enroll = test::small_optics();
  auto challenge = enroll;
  challenge.lambda = 1.05 * enroll.lambda;
  RotationSearch search;
  search.max_shift = 16;
  const auto genuine = simulate_speckle(m, challenge, 1);
  EXPECT_LT(match_with_rotation(simulate_hologram_copy(m, enroll, challenge, 2), genuine, search).peak, 0.5);
  EXPECT_GE(match_with_rotation(simulate_speckle(m, challenge, 3), genuine, search).peak, 0.5);
}

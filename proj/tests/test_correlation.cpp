#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ose/correlation.hpp"
#include "ose/error.hpp"
#include "ose/surface.hpp"
#include "test_util.hpp"

using namespace ose;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Image from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Image img(rows.begin()->size(), rows.size());
  std::size_t y = 0;
  for (const auto& r : rows) {
    std::size_t x = 0;
    for (double v : r) img(x++, y) = v;
    ++y;
  }
  return img;
}

Image crop(const Image& src, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  Image out(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) out(x, y) = src(x + x0, y + y0);
  return out;
}

// Smooth random image so bilinear rotation keeps most of the correlation.
Image smooth_image(std::size_t n, std::uint64_t seed) { return gaussian_field(n, n, 1.0, 3.0, seed); }

}  // namespace

TEST(Zncc, SelfIsOne) {
  const Image a = test::random_image(32, 32, 1);
  EXPECT_NEAR(zncc(a, a), 1.0, 1e-12);
}

TEST(Zncc, HandExample) {
  EXPECT_NEAR(zncc(from_rows({{1, 2}, {3, 4}}), from_rows({{4, 3}, {2, 1}})), -1.0, 1e-12);
}

TEST(Zncc, AffineInvariance) {
  const Image a = test::random_image(32, 32, 1), b = test::random_image(32, 32, 2);
  Image s = a, n = a;
  for (auto& v : s) v = 3.0 * v + 7.0;
  for (auto& v : n) v = -2.0 * v + 1.0;
  EXPECT_NEAR(zncc(s, b), zncc(a, b), 1e-12);
  EXPECT_NEAR(zncc(n, b), -zncc(a, b), 1e-12);
  EXPECT_NEAR(zncc(a, b), zncc(b, a), 1e-15);
}

TEST(Zncc, Errors) {
  EXPECT_THROW(zncc(Image(4, 4, 1.0), test::random_image(4, 4, 1)), DegenerateInput);
  EXPECT_THROW(zncc(test::random_image(4, 4, 1), test::random_image(5, 4, 1)), InvalidArgument);
}

TEST(Zncc, IndependentPatternsNearZero) {
  for (std::uint64_t s = 0; s < 10; ++s)
    EXPECT_LT(std::abs(zncc(test::random_image(256, 256, 2 * s), test::random_image(256, 256, 2 * s + 1))), 0.05);
}

// a = [1 2 3 4], b = [2 4 1 3]: dx = +-1 overlaps give -1 / (sqrt(2) sqrt(42) / 3)
// = -3 / sqrt(84); dx = 0 gives 0.
TEST(BruteForce, RowExample) {
  const Image a = from_rows({{1, 2, 3, 4}}), b = from_rows({{2, 4, 1, 3}});
  const auto map = brute_force_correlate(a, b, {1, 0});
  EXPECT_NEAR(map.at(-1, 0), -3.0 / std::sqrt(84.0), 1e-12);
  EXPECT_NEAR(map.at(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(map.at(1, 0), -3.0 / std::sqrt(84.0), 1e-12);
  const auto fast = correlate_shifts(a, b, {1, 0});
  for (int dx = -1; dx <= 1; ++dx) EXPECT_NEAR(fast.at(dx, 0), map.at(dx, 0), 1e-9);
}

TEST(BruteForce, AntiCorrelated) {
  const Image a = test::random_image(16, 16, 3);
  Image b = a;
  for (auto& v : b) v = 2.0 - v;
  const auto map = brute_force_correlate(a, b, ShiftRange::square(2));
  EXPECT_NEAR(map.at(0, 0), -1.0, 1e-12);
}

TEST(CorrelateShifts, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Image a = test::random_image(16, 16, 100 + s), b = test::random_image(16, 16, 200 + s);
    const auto fast = correlate_shifts(a, b, ShiftRange::square(4));
    const auto slow = brute_force_correlate(a, b, ShiftRange::square(4));
    for (std::size_t i = 0; i < fast.values().size(); ++i)
      ASSERT_NEAR(fast.values().data()[i], slow.values().data()[i], 1e-6);
  }
}

TEST(CorrelateShifts, MaskedMatchesBruteForce) {
  const Image a = test::random_image(24, 20, 1), b = test::random_image(24, 20, 2);
  Mask m(24, 20, 1);
  for (std::size_t y = 0; y < 20; ++y) m(y % 24, y) = 0;
  m(3, 3) = m(4, 3) = 0;
  const auto fast = correlate_shifts(a, b, m, {5, 4});
  const auto slow = brute_force_correlate(a, b, m, {5, 4});
  for (std::size_t i = 0; i < fast.values().size(); ++i) ASSERT_NEAR(fast.values().data()[i], slow.values().data()[i], 1e-6);
}

TEST(CorrelateShifts, SelfPeakAtOrigin) {
  const Image a = test::random_image(64, 64, 4);
  const auto map = correlate_shifts(a, a, ShiftRange::square(8));
  const Peak p = find_peak(map);
  EXPECT_NEAR(p.value, 1.0, 1e-9);
  EXPECT_EQ(p.dx, 0);
  EXPECT_EQ(p.dy, 0);
  for (double v : map.values()) {
    EXPECT_LE(v, 1.0 + 1e-9);
    EXPECT_GE(v, -1.0 - 1e-9);
  }
}

TEST(CorrelateShifts, RecoversTranslation) {
  const Image big = test::random_image(80, 80, 5);
  const Image a = crop(big, 8, 8, 64, 64);
  const Image b = crop(big, 5, 10, 64, 64);  // b(x + 3, y - 2) = a(x, y)
  const Peak p = find_peak(correlate_shifts(a, b, ShiftRange::square(8)));
  EXPECT_EQ(p.dx, 3);
  EXPECT_EQ(p.dy, -2);
  EXPECT_NEAR(p.value, 1.0, 1e-9);
}

TEST(CorrelateShifts, Symmetry) {
  const Image a = test::random_image(32, 32, 6), b = test::random_image(32, 32, 7);
  const auto ab = correlate_shifts(a, b, ShiftRange::square(4));
  const auto ba = correlate_shifts(b, a, ShiftRange::square(4));
  for (int dy = -4; dy <= 4; ++dy)
    for (int dx = -4; dx <= 4; ++dx) EXPECT_NEAR(ab.at(dx, dy), ba.at(-dx, -dy), 1e-9);
}

TEST(CorrelateShifts, RejectsLargeShift) {
  const Image a = test::random_image(32, 32, 6);
  EXPECT_THROW(correlate_shifts(a, a, ShiftRange::square(9)), InvalidArgument);
  EXPECT_THROW(brute_force_correlate(a, a, ShiftRange::square(9)), InvalidArgument);
  EXPECT_NO_THROW(correlate_shifts(a, a, ShiftRange::square(8)));
}

TEST(FindPeak, TieBreak) {
  CorrelationMap m(ShiftRange::square(3));
  m.at(1, 0) = 0.7;
  m.at(3, 0) = 0.7;
  m.at(-2, 2) = 0.7;
  Peak p = find_peak(m);
  EXPECT_EQ(p.dx, 1);
  EXPECT_EQ(p.dy, 0);
  m.at(0, -1) = 0.7;  // same |dx| + |dy|, smaller dy wins
  p = find_peak(m);
  EXPECT_EQ(p.dx, 0);
  EXPECT_EQ(p.dy, -1);
  m.at(-1, 0) = 0.7;
  m.at(0, -1) = 0.0;
  p = find_peak(m);  // same dy, smaller dx wins
  EXPECT_EQ(p.dx, -1);
}

TEST(FindPeak, SingleEntry) {
  CorrelationMap m(ShiftRange::square(0));
  m.at(0, 0) = 0.25;
  EXPECT_EQ(find_peak(m).value, 0.25);
}

TEST(Rotation, SweepAngles) {
  const auto angles = sweep_angles(2.5 * kDeg, 0.25 * kDeg);
  ASSERT_EQ(angles.size(), 21u);
  EXPECT_NEAR(angles.front(), -2.5 * kDeg, 1e-15);
  EXPECT_EQ(angles[10], 0.0);
  EXPECT_EQ(sweep_angles(0.0, 0.25 * kDeg).size(), 1u);
}

TEST(Rotation, ZeroAngleIsIdentity) {
  const Image a = test::random_image(32, 32, 8);
  const auto r = rotate_image(a, 0.0);
  EXPECT_EQ(r.values, a);
  for (auto v : r.valid) EXPECT_EQ(v, 1);
}

TEST(Rotation, ZeroRangeEqualsShiftSearch) {
  const Image a = test::random_image(64, 64, 9), b = test::random_image(64, 64, 10);
  RotationSearch s;
  s.theta_range = 0.0;
  s.max_shift = 8;
  const auto r = match_with_rotation(a, b, s);
  const auto map = correlate_shifts(a, b, ShiftRange::square(8));
  const Peak p = find_peak(map);
  EXPECT_EQ(r.peak, p.value);
  EXPECT_EQ(r.dx, p.dx);
  EXPECT_EQ(r.dy, p.dy);
  EXPECT_EQ(r.rotation, 0.0);
}

TEST(Rotation, RecoversOneDegree) {
  const Image big = smooth_image(320, 11);
  const Image a = crop(big, 32, 32, 256, 256);
  const Image b = crop(rotate_image(big, 1.0 * kDeg).values, 32, 32, 256, 256);
  RotationSearch s;
  s.theta_range = 2.0 * kDeg;
  s.max_shift = 16;
  const auto r = match_with_rotation(a, b, s);
  EXPECT_NEAR(r.rotation, 1.0 * kDeg, 0.25 * kDeg + 1e-12);
  EXPECT_GE(r.peak, 0.9);
}

TEST(Rotation, ParallelEqualsSerial) {
  const Image a = smooth_image(128, 12), b = smooth_image(128, 13);
  RotationSearch s;
  s.max_shift = 16;
  s.threads = 1;
  const auto serial = search_rotations(a, b, s);
  s.threads = 4;
  const auto parallel = search_rotations(a, b, s);
  EXPECT_EQ(serial.result.peak, parallel.result.peak);
  EXPECT_EQ(serial.result.rotation, parallel.result.rotation);
  EXPECT_EQ(serial.map.values(), parallel.map.values());
}

TEST(Rotation, ValidatesParameters) {
  RotationSearch s;
  s.theta_step = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.theta_range = -1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

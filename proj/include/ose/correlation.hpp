#pragma once

#include <numbers>

#include "ose/grid.hpp"
#include "ose/optics.hpp"

namespace ose {

struct ShiftRange {
  int max_dx = 0;
  int max_dy = 0;

  static ShiftRange square(int s) { return {s, s}; }
  friend bool operator==(const ShiftRange&, const ShiftRange&) = default;
};

/// Coefficient surface indexed by shift. Entry (dx, dy) compares a(x, y) with
/// b(x + dx, y + dy) over the pixels where both exist.
class CorrelationMap {
 public:
  CorrelationMap() = default;
  CorrelationMap(ShiftRange range, double rotation = 0.0);

  const ShiftRange& range() const noexcept { return range_; }
  double rotation() const noexcept { return rotation_; }
  const Image& values() const noexcept { return values_; }
  Image& values() noexcept { return values_; }

  double& at(int dx, int dy) noexcept {
    return values_(static_cast<std::size_t>(dx + range_.max_dx), static_cast<std::size_t>(dy + range_.max_dy));
  }
  double at(int dx, int dy) const noexcept {
    return values_(static_cast<std::size_t>(dx + range_.max_dx), static_cast<std::size_t>(dy + range_.max_dy));
  }

 private:
  ShiftRange range_;
  double rotation_ = 0.0;
  Image values_;
};

struct Peak {
  double value = 0.0;
  int dx = 0;
  int dy = 0;
};

struct CorrelationResult {
  double peak = 0.0;
  int dx = 0;
  int dy = 0;
  double rotation = 0.0;  ///< radians; b is a rotated by this angle
  double off_peak_mean = 0.0;
  double off_peak_std = 0.0;
};

/// Zero-normalized cross-correlation over the full frame.
double zncc(const Image& a, const Image& b);
double zncc(const SpecklePattern& a, const SpecklePattern& b);

/// Per-shift overlap ZNCC for all |dx| <= max_dx, |dy| <= max_dy, computed with
/// FFT cross-correlation plus running-sum normalization. Overlaps with no
/// variance on either side score 0.
CorrelationMap correlate_shifts(const Image& a, const Image& b, ShiftRange range);
CorrelationMap correlate_shifts(const SpecklePattern& a, const SpecklePattern& b, int max_shift);

/// Same, with pixels of `b` where `b_mask` is zero excluded from every overlap.
CorrelationMap correlate_shifts(const Image& a, const Image& b, const Mask& b_mask, ShiftRange range);

/// Direct double-loop evaluation; the reference for correlate_shifts.
CorrelationMap brute_force_correlate(const Image& a, const Image& b, ShiftRange range);
CorrelationMap brute_force_correlate(const Image& a, const Image& b, const Mask& b_mask, ShiftRange range);

/// Global maximum. Ties: smallest |dx| + |dy|, then smallest dy, then dx.
Peak find_peak(const CorrelationMap& map);

/// Mean and standard deviation of all entries except the peak.
std::pair<double, double> off_peak_stats(const CorrelationMap& map, const Peak& peak);

struct RotatedImage {
  Image values;
  Mask valid;
};

/// Content rotated by `theta` about the image centre (bilinear). Pixels whose
/// source falls outside the input are marked invalid and set to zero.
RotatedImage rotate_image(const Image& image, double theta);

struct RotationSearch {
  double theta_range = 2.5 * std::numbers::pi / 180.0;
  double theta_step = 0.25 * std::numbers::pi / 180.0;
  int max_shift = 32;
  /// Halve the step around the best angle this many times after the sweep.
  int refine_levels = 0;
  /// Worker threads for the sweep; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct RotationMatch {
  CorrelationResult result;
  CorrelationMap map;  ///< map at the winning rotation
};

/// Rotation sweep over [-theta_range, +theta_range] followed by the shift search
/// at each angle; returns the global peak over (theta, dx, dy).
RotationMatch search_rotations(const Image& a, const Image& b, const RotationSearch& search);

CorrelationResult match_with_rotation(const Image& a, const Image& b, const RotationSearch& search);
CorrelationResult match_with_rotation(const SpecklePattern& a, const SpecklePattern& b,
                                      const RotationSearch& search);

/// Sweep angles, ascending.
std::vector<double> sweep_angles(double theta_range, double theta_step);

}  // namespace ose

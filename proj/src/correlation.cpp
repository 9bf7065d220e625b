#include "ose/correlation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "ose/error.hpp"
#include "ose/fft.hpp"

namespace ose {
namespace {

using Complex = fft::Complex;

constexpr double kDegenerateTol = 1e-12;

void validate_pair(const Image& a, const Image& b, ShiftRange range) {
  if (a.empty() || b.empty()) throw InvalidArgument("correlate: empty image");
  if (!a.same_shape(b))
    throw InvalidArgument("correlate: shape mismatch (" + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  if (range.max_dx < 0 || range.max_dy < 0) throw InvalidArgument("correlate: negative max_shift");
  if (a.width() < 4 * static_cast<std::size_t>(range.max_dx) ||
      a.height() < 4 * static_cast<std::size_t>(range.max_dy))
    throw InvalidArgument("correlate: max_shift too large, images must span at least 4*max_shift (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) + ", max_shift " +
                          std::to_string(range.max_dx) + "," + std::to_string(range.max_dy) + ")");
}

void validate_mask(const Image& b, const Mask& mask) {
  if (!mask.same_shape(b)) throw InvalidArgument("correlate: mask shape mismatch");
}

// Summed-area table with a zero first row/column.
class Integral {
 public:
  Integral() = default;
  template <typename F>
  Integral(std::size_t w, std::size_t h, F&& value) : w_(w), s_(w + 1, h + 1, 0.0) {
    for (std::size_t y = 0; y < h; ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < w; ++x) {
        row += value(x, y);
        s_(x + 1, y + 1) = s_(x + 1, y) + row;
      }
    }
  }
  double sum(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const {
    return s_(x1, y1) - s_(x0, y1) - s_(x1, y0) + s_(x0, y0);
  }

 private:
  std::size_t w_ = 0;
  Image s_;
};

struct Span1 {
  std::size_t a0, a1;  // overlap in a
  std::size_t b0, b1;  // overlap in b
};

Span1 overlap(std::size_t n, int d) {
  const long ln = static_cast<long>(n);
  const long lo = std::max(0L, -static_cast<long>(d));
  const long hi = std::min(ln, ln - d);
  if (hi <= lo) return {0, 0, 0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi), static_cast<std::size_t>(lo + d),
          static_cast<std::size_t>(hi + d)};
}

double coefficient(double n, double sa, double saa, double sb, double sbb, double sab, double tol_a,
                   double tol_b) {
  if (n < 2.0) return 0.0;
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (va <= tol_a * n || vb <= tol_b * n) return 0.0;
  const double r = (sab - sa * sb / n) / std::sqrt(va * vb);
  return std::clamp(r, -1.0, 1.0);
}

double mean_of(const Image& g) {
  double s = 0.0;
  for (double v : g) s += v;
  return s / static_cast<double>(g.size());
}

double mean_square(const Image& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return s / static_cast<double>(g.size());
}

Image pad(const Image& g, std::size_t pw, std::size_t ph) {
  Image out(pw, ph, 0.0);
  for (std::size_t y = 0; y < g.height(); ++y) std::copy(g.row(y).begin(), g.row(y).end(), out.row(y).begin());
  return out;
}

Image cross_correlate(const Grid<Complex>& fa, const Grid<Complex>& fb, std::size_t pw) {
  Grid<Complex> prod(fa.width(), fa.height());
  for (std::size_t i = 0; i < prod.size(); ++i) prod.data()[i] = std::conj(fa.data()[i]) * fb.data()[i];
  return fft::inverse_real(prod, pw);
}

// Precomputed transforms of the fixed image `a` for repeated shift searches.
class ShiftCorrelator {
 public:
  ShiftCorrelator(const Image& a, ShiftRange range, bool masked)
      : w_(a.width()),
        h_(a.height()),
        range_(range),
        pw_(fft::good_size(a.width() + static_cast<std::size_t>(range.max_dx))),
        ph_(fft::good_size(a.height() + static_cast<std::size_t>(range.max_dy))) {
    const double m = mean_of(a);
    Image ac(w_, h_);
    for (std::size_t i = 0; i < a.size(); ++i) ac.data()[i] = a.data()[i] - m;
    tol_a_ = kDegenerateTol * mean_square(ac);
    fa_ = fft::forward_real(pad(ac, pw_, ph_));
    if (masked) {
      Image a2(w_, h_);
      for (std::size_t i = 0; i < ac.size(); ++i) a2.data()[i] = ac.data()[i] * ac.data()[i];
      fa2_ = fft::forward_real(pad(a2, pw_, ph_));
    }
    ia_ = Integral(w_, h_, [&](std::size_t x, std::size_t y) { return ac(x, y); });
    iaa_ = Integral(w_, h_, [&](std::size_t x, std::size_t y) { return ac(x, y) * ac(x, y); });
  }

  CorrelationMap run(const Image& b, const Mask* mask, double rotation) const {
    // Centre b on its valid pixels and zero the rest.
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (mask && !mask->data()[i]) continue;
      sum += b.data()[i];
      ++count;
    }
    if (count == 0) throw DegenerateInput("correlate: no valid pixels in b");
    const double mb = sum / static_cast<double>(count);
    Image bc(w_, h_, 0.0);
    Image mk(w_, h_, 1.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (mask && !mask->data()[i]) {
        mk.data()[i] = 0.0;
        continue;
      }
      bc.data()[i] = b.data()[i] - mb;
    }
    const double tol_b = kDegenerateTol * mean_square(bc) * static_cast<double>(b.size()) /
                         static_cast<double>(count);

    const Image sab = cross_correlate(fa_, fft::forward_real(pad(bc, pw_, ph_)), pw_);
    Image sa, saa;
    if (mask) {
      const auto fm = fft::forward_real(pad(mk, pw_, ph_));
      sa = cross_correlate(fa_, fm, pw_);
      saa = cross_correlate(fa2_, fm, pw_);
    }
    const Integral ib(w_, h_, [&](std::size_t x, std::size_t y) { return bc(x, y); });
    const Integral ibb(w_, h_, [&](std::size_t x, std::size_t y) { return bc(x, y) * bc(x, y); });
    const Integral im(w_, h_, [&](std::size_t x, std::size_t y) { return mk(x, y); });

    CorrelationMap out(range_, rotation);
    for (int dy = -range_.max_dy; dy <= range_.max_dy; ++dy) {
      const Span1 oy = overlap(h_, dy);
      const std::size_t iy = static_cast<std::size_t>((dy + static_cast<long>(ph_)) % static_cast<long>(ph_));
      for (int dx = -range_.max_dx; dx <= range_.max_dx; ++dx) {
        const Span1 ox = overlap(w_, dx);
        const std::size_t ix = static_cast<std::size_t>((dx + static_cast<long>(pw_)) % static_cast<long>(pw_));
        double n, s_a, s_aa;
        if (mask) {
          n = im.sum(ox.b0, oy.b0, ox.b1, oy.b1);
          s_a = sa(ix, iy);
          s_aa = saa(ix, iy);
        } else {
          n = static_cast<double>((ox.a1 - ox.a0) * (oy.a1 - oy.a0));
          s_a = ia_.sum(ox.a0, oy.a0, ox.a1, oy.a1);
          s_aa = iaa_.sum(ox.a0, oy.a0, ox.a1, oy.a1);
        }
        const double s_b = ib.sum(ox.b0, oy.b0, ox.b1, oy.b1);
        const double s_bb = ibb.sum(ox.b0, oy.b0, ox.b1, oy.b1);
        n = std::round(n);
        out.at(dx, dy) = coefficient(n, s_a, s_aa, s_b, s_bb, sab(ix, iy), tol_a_, tol_b);
      }
    }
    return out;
  }

 private:
  std::size_t w_, h_;
  ShiftRange range_;
  std::size_t pw_, ph_;
  double tol_a_ = 0.0;
  Grid<Complex> fa_, fa2_;
  Integral ia_, iaa_;
};

CorrelationMap brute_force_impl(const Image& a, const Image& b, const Mask* mask, ShiftRange range) {
  const std::size_t w = a.width();
  const std::size_t h = a.height();
  auto valid = [&](std::size_t x, std::size_t y) { return mask == nullptr || (*mask)(x, y) != 0; };

  // Same degenerate-overlap tolerance as the FFT path.
  const double ma = mean_of(a);
  double msa = 0.0;
  for (double v : a) msa += (v - ma) * (v - ma);
  msa /= static_cast<double>(a.size());
  double sb = 0.0, nb = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      if (valid(x, y)) sb += b(x, y), nb += 1.0;
  const double mb = sb / nb;
  double msb = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      if (valid(x, y)) msb += (b(x, y) - mb) * (b(x, y) - mb);
  msb /= nb;

  CorrelationMap out(range, 0.0);
  for (int dy = -range.max_dy; dy <= range.max_dy; ++dy) {
    const Span1 oy = overlap(h, dy);
    for (int dx = -range.max_dx; dx <= range.max_dx; ++dx) {
      const Span1 ox = overlap(w, dx);
      double n = 0.0, s_a = 0.0, s_b = 0.0;
      for (std::size_t y = oy.a0; y < oy.a1; ++y)
        for (std::size_t x = ox.a0; x < ox.a1; ++x) {
          const std::size_t bx = x + static_cast<std::size_t>(dx);
          const std::size_t by = y + static_cast<std::size_t>(dy);
          if (!valid(bx, by)) continue;
          n += 1.0;
          s_a += a(x, y);
          s_b += b(bx, by);
        }
      if (n < 2.0) {
        out.at(dx, dy) = 0.0;
        continue;
      }
      const double mean_a = s_a / n;
      const double mean_b = s_b / n;
      double cov = 0.0, va = 0.0, vb = 0.0;
      for (std::size_t y = oy.a0; y < oy.a1; ++y)
        for (std::size_t x = ox.a0; x < ox.a1; ++x) {
          const std::size_t bx = x + static_cast<std::size_t>(dx);
          const std::size_t by = y + static_cast<std::size_t>(dy);
          if (!valid(bx, by)) continue;
          const double da = a(x, y) - mean_a;
          const double db = b(bx, by) - mean_b;
          cov += da * db;
          va += da * da;
          vb += db * db;
        }
      double r = 0.0;
      if (va > kDegenerateTol * msa * n && vb > kDegenerateTol * msb * n)
        r = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
      out.at(dx, dy) = r;
    }
  }
  return out;
}

// Strict "better than" ordering for peaks: larger value, then the tie-break keys.
bool peak_better(double v, int dx, int dy, const Peak& best) {
  if (v != best.value) return v > best.value;
  const int k = std::abs(dx) + std::abs(dy);
  const int kb = std::abs(best.dx) + std::abs(best.dy);
  if (k != kb) return k < kb;
  if (dy != best.dy) return dy < best.dy;
  return dx < best.dx;
}

bool result_better(const CorrelationResult& r, const CorrelationResult& best) {
  if (r.peak != best.peak) return r.peak > best.peak;
  const double ar = std::abs(r.rotation), ab = std::abs(best.rotation);
  if (ar != ab) return ar < ab;
  if (r.rotation != best.rotation) return r.rotation < best.rotation;
  return peak_better(r.peak, r.dx, r.dy, Peak{best.peak, best.dx, best.dy});
}

}  // namespace

CorrelationMap::CorrelationMap(ShiftRange range, double rotation)
    : range_(range),
      rotation_(rotation),
      values_(static_cast<std::size_t>(2 * range.max_dx + 1), static_cast<std::size_t>(2 * range.max_dy + 1),
              0.0) {
  if (range.max_dx < 0 || range.max_dy < 0) throw InvalidArgument("correlation map: negative shift range");
}

double zncc(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("zncc: shape mismatch");
  if (a.empty()) throw InvalidArgument("zncc: empty image");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a.data()[i] - ma;
    const double db = b.data()[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (!(va > 0.0) || !(vb > 0.0)) throw DegenerateInput("zncc: constant input");
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

double zncc(const SpecklePattern& a, const SpecklePattern& b) { return zncc(a.to_image(), b.to_image()); }

CorrelationMap correlate_shifts(const Image& a, const Image& b, ShiftRange range) {
  validate_pair(a, b, range);
  return ShiftCorrelator(a, range, false).run(b, nullptr, 0.0);
}

CorrelationMap correlate_shifts(const SpecklePattern& a, const SpecklePattern& b, int max_shift) {
  return correlate_shifts(a.to_image(), b.to_image(), ShiftRange::square(max_shift));
}

CorrelationMap correlate_shifts(const Image& a, const Image& b, const Mask& b_mask, ShiftRange range) {
  validate_pair(a, b, range);
  validate_mask(b, b_mask);
  return ShiftCorrelator(a, range, true).run(b, &b_mask, 0.0);
}

CorrelationMap brute_force_correlate(const Image& a, const Image& b, ShiftRange range) {
  validate_pair(a, b, range);
  return brute_force_impl(a, b, nullptr, range);
}

CorrelationMap brute_force_correlate(const Image& a, const Image& b, const Mask& b_mask, ShiftRange range) {
  validate_pair(a, b, range);
  validate_mask(b, b_mask);
  return brute_force_impl(a, b, &b_mask, range);
}

Peak find_peak(const CorrelationMap& map) {
  const auto& r = map.range();
  if (map.values().empty()) throw InvalidArgument("find_peak: empty map");
  Peak best{map.at(-r.max_dx, -r.max_dy), -r.max_dx, -r.max_dy};
  for (int dy = -r.max_dy; dy <= r.max_dy; ++dy)
    for (int dx = -r.max_dx; dx <= r.max_dx; ++dx)
      if (peak_better(map.at(dx, dy), dx, dy, best)) best = {map.at(dx, dy), dx, dy};
  return best;
}

std::pair<double, double> off_peak_stats(const CorrelationMap& map, const Peak& peak) {
  const auto& r = map.range();
  double s = 0.0, s2 = 0.0, n = 0.0;
  for (int dy = -r.max_dy; dy <= r.max_dy; ++dy)
    for (int dx = -r.max_dx; dx <= r.max_dx; ++dx) {
      if (dx == peak.dx && dy == peak.dy) continue;
      const double v = map.at(dx, dy);
      s += v;
      s2 += v * v;
      n += 1.0;
    }
  if (n == 0.0) return {0.0, 0.0};
  const double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean))};
}

RotatedImage rotate_image(const Image& image, double theta) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  RotatedImage out{Image(w, h, 0.0), Mask(w, h, 0)};
  const double cx = 0.5 * static_cast<double>(w - 1);
  const double cy = 0.5 * static_cast<double>(h - 1);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double max_u = static_cast<double>(w - 1) + 1e-9;
  const double max_v = static_cast<double>(h - 1) + 1e-9;
  for (std::size_t y = 0; y < h; ++y) {
    const double py = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < w; ++x) {
      const double px = static_cast<double>(x) - cx;
      // Source of output pixel p is R(-theta) p.
      const double u = c * px + s * py + cx;
      const double v = -s * px + c * py + cy;
      if (u < -1e-9 || v < -1e-9 || u > max_u || v > max_v) continue;
      const double uc = std::clamp(u, 0.0, static_cast<double>(w - 1));
      const double vc = std::clamp(v, 0.0, static_cast<double>(h - 1));
      const auto x0 = static_cast<std::size_t>(uc);
      const auto y0 = static_cast<std::size_t>(vc);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const std::size_t y1 = std::min(y0 + 1, h - 1);
      const double fx = uc - static_cast<double>(x0);
      const double fy = vc - static_cast<double>(y0);
      out.values(x, y) = (image(x0, y0) * (1.0 - fx) + image(x1, y0) * fx) * (1.0 - fy) +
                         (image(x0, y1) * (1.0 - fx) + image(x1, y1) * fx) * fy;
      out.valid(x, y) = 1;
    }
  }
  return out;
}

void RotationSearch::validate() const {
  if (!(theta_step > 0.0)) throw InvalidArgument("rotation search: theta_step must be > 0");
  if (!(theta_range >= 0.0)) throw InvalidArgument("rotation search: theta_range must be >= 0");
  if (max_shift < 0) throw InvalidArgument("rotation search: max_shift must be >= 0");
  if (refine_levels < 0) throw InvalidArgument("rotation search: refine_levels must be >= 0");
}

std::vector<double> sweep_angles(double theta_range, double theta_step) {
  const auto n = static_cast<long>(std::floor(theta_range / theta_step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long k = -n; k <= n; ++k) out.push_back(static_cast<double>(k) * theta_step);
  return out;
}

RotationMatch search_rotations(const Image& a, const Image& b, const RotationSearch& search) {
  search.validate();
  const ShiftRange range = ShiftRange::square(search.max_shift);
  validate_pair(a, b, range);

  std::vector<double> angles = sweep_angles(search.theta_range, search.theta_step);
  const bool masked = std::any_of(angles.begin(), angles.end(), [](double t) { return t != 0.0; }) ||
                      search.refine_levels > 0;
  const ShiftCorrelator correlator(a, range, masked);

  auto evaluate = [&](double theta) {
    if (theta == 0.0) return correlator.run(b, nullptr, 0.0);
    // b is a rotated by theta; undo it.
    auto rotated = rotate_image(b, -theta);
    return correlator.run(rotated.values, &rotated.valid, theta);
  };

  auto summarize = [](const CorrelationMap& map) {
    const Peak p = find_peak(map);
    const auto [mean, sd] = off_peak_stats(map, p);
    return CorrelationResult{p.value, p.dx, p.dy, map.rotation(), mean, sd};
  };

  auto run_all = [&](const std::vector<double>& thetas) {
    std::vector<std::optional<CorrelationMap>> maps(thetas.size());
    unsigned threads = search.threads != 0 ? search.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(thetas.size()));
    if (threads <= 1) {
      for (std::size_t i = 0; i < thetas.size(); ++i) maps[i] = evaluate(thetas[i]);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = next++; i < thetas.size(); i = next++) maps[i] = evaluate(thetas[i]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    return maps;
  };

  // Reduction in sweep order with a total tie-break, independent of scheduling.
  RotationMatch best;
  bool have = false;
  auto consider = [&](std::vector<std::optional<CorrelationMap>>& maps) {
    for (auto& m : maps) {
      const CorrelationResult r = summarize(*m);
      if (!have || result_better(r, best.result)) {
        best.result = r;
        best.map = std::move(*m);
        have = true;
      }
    }
  };

  auto maps = run_all(angles);
  consider(maps);

  double step = search.theta_step;
  for (int level = 0; level < search.refine_levels; ++level) {
    step *= 0.5;
    const double centre = best.result.rotation;
    auto refined = run_all({centre - step, centre + step});
    consider(refined);
  }
  return best;
}

CorrelationResult match_with_rotation(const Image& a, const Image& b, const RotationSearch& search) {
  return search_rotations(a, b, search).result;
}

CorrelationResult match_with_rotation(const SpecklePattern& a, const SpecklePattern& b,
                                      const RotationSearch& search) {
  return match_with_rotation(a.to_image(), b.to_image(), search);
}

}  // namespace ose

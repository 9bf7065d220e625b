#include "ose/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ose/error.hpp"
#include "ose/fft.hpp"
#include "ose/random.hpp"

namespace ose {
namespace {

double sample_mean(const Image& g) {
  double s = 0.0;
  for (double v : g) s += v;
  return g.empty() ? 0.0 : s / static_cast<double>(g.size());
}

double sample_rms(const Image& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return g.empty() ? 0.0 : std::sqrt(s / static_cast<double>(g.size()));
}

void remove_mean_and_scale(Image& g, double target_rms) {
  const double m = sample_mean(g);
  for (auto& v : g) v -= m;
  const double r = sample_rms(g);
  const double k = r > 0.0 ? target_rms / r : 0.0;
  for (auto& v : g) v *= k;
}

std::string format_params(const SurfaceParams& p) {
  std::ostringstream os;
  os << "sigma_h=" << p.sigma_h << " corr_len=" << p.corr_len << " seed=" << p.seed;
  return os.str();
}

}  // namespace

void SurfaceParams::validate() const {
  if (!(sigma_h >= 0.0) || !std::isfinite(sigma_h))
    throw InvalidArgument("surface: sigma_h must be finite and >= 0");
  if (!(corr_len > 0.0) || !std::isfinite(corr_len))
    throw InvalidArgument("surface: corr_len must be > 0");
}

HeightMap::HeightMap(Image heights, double pitch, Provenance provenance)
    : heights_(std::move(heights)), pitch_(pitch), provenance_(std::move(provenance)) {
  if (heights_.width() < 2 || heights_.height() < 2)
    throw InvalidArgument("height map: grid must be at least 2x2");
  if (!(pitch_ > 0.0) || !std::isfinite(pitch_))
    throw InvalidArgument("height map: pitch must be > 0");
  for (double v : heights_)
    if (!std::isfinite(v)) throw InvalidArgument("height map: non-finite height");
}

double HeightMap::rms() const { return sample_rms(heights_); }
double HeightMap::mean() const { return sample_mean(heights_); }

Image gaussian_field(std::size_t width, std::size_t height, double pitch, double corr_len,
                     std::uint64_t seed) {
  if (width == 0 || height == 0) throw InvalidArgument("gaussian_field: empty grid");
  if (!(pitch > 0.0)) throw InvalidArgument("gaussian_field: pitch must be > 0");
  if (!(corr_len > 0.0)) throw InvalidArgument("gaussian_field: corr_len must be > 0");

  const auto margin = static_cast<std::size_t>(std::ceil(corr_len / pitch));
  const std::size_t pw = fft::good_size(width + 2 * margin);
  const std::size_t ph = fft::good_size(height + 2 * margin);

  Grid<fft::Complex> buf(pw, ph);
  std::mt19937_64 rng(derive_seed(seed, {0x5u}));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : buf) v = {normal(rng), 0.0};

  // Convolving white noise with exp(-2 r^2 / l^2) yields autocovariance
  // proportional to exp(-r^2 / l^2). Its transform is exp(-pi^2 l^2 f^2 / 2).
  fft::forward(buf);
  const double a = std::numbers::pi * std::numbers::pi * corr_len * corr_len / 2.0;
  for (std::size_t y = 0; y < ph; ++y) {
    const double fy = static_cast<double>(fft::signed_bin(y, ph)) / (static_cast<double>(ph) * pitch);
    for (std::size_t x = 0; x < pw; ++x) {
      const double fx =
          static_cast<double>(fft::signed_bin(x, pw)) / (static_cast<double>(pw) * pitch);
      buf(x, y) *= std::exp(-a * (fx * fx + fy * fy));
    }
  }
  fft::inverse(buf);

  Image out(width, height);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) out(x, y) = buf(x + margin, y + margin).real();
  remove_mean_and_scale(out, 1.0);
  return out;
}

HeightMap generate_surface(const SurfaceParams& params, std::size_t width, std::size_t height,
                           double pitch) {
  params.validate();
  if (width < 2 || height < 2) throw InvalidArgument("generate_surface: grid must be at least 2x2");
  if (!(pitch > 0.0) || !std::isfinite(pitch))
    throw InvalidArgument("generate_surface: pitch must be > 0");

  Image h = params.sigma_h > 0.0 ? gaussian_field(width, height, pitch, params.corr_len, params.seed)
                                 : Image(width, height, 0.0);
  for (auto& v : h) v *= params.sigma_h;

  Provenance prov;
  prov.surface = params;
  prov.history.push_back("generate " + format_params(params));
  return HeightMap(std::move(h), pitch, std::move(prov));
}

HeightMap make_replica(const HeightMap& master, const ReplicaParams& params) {
  if (master.empty()) throw InvalidArgument("make_replica: empty master");
  if (!(params.error_rms >= 0.0) || !std::isfinite(params.error_rms))
    throw InvalidArgument("make_replica: error_rms must be finite and >= 0");
  const double corr = params.corr_len.value_or(master.pitch());
  if (!(corr > 0.0)) throw InvalidArgument("make_replica: error corr_len must be > 0");
  const double fine = params.fine_fraction;
  if (!(fine >= 0.0 && fine <= 1.0)) throw InvalidArgument("make_replica: fine_fraction must lie in [0, 1]");

  Image h = master.heights();
  if (params.error_rms > 0.0) {
    Image err = gaussian_field(master.width(), master.height(), master.pitch(), corr,
                               derive_seed(params.seed, {0x7e9u}));
    if (fine > 0.0) {
      const Image white = gaussian_field(master.width(), master.height(), master.pitch(), master.pitch(),
                                         derive_seed(params.seed, {0xf1eu}));
      const double a = std::sqrt(1.0 - fine), b = std::sqrt(fine);
      for (std::size_t i = 0; i < err.size(); ++i) err.data()[i] = a * err.data()[i] + b * white.data()[i];
      remove_mean_and_scale(err, 1.0);
    }
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] += params.error_rms * err.data()[i];
  }

  Provenance prov = master.provenance();
  std::ostringstream os;
  os << "replica error_rms=" << params.error_rms << " corr_len=" << corr << " fine_fraction=" << fine
     << " seed=" << params.seed;
  prov.history.push_back(os.str());
  return HeightMap(std::move(h), master.pitch(), std::move(prov));
}

Rect resolve_region(const Region& region, std::size_t width, std::size_t height) {
  if (const auto* f = std::get_if<Fraction>(&region)) {
    if (!(f->value >= 0.0 && f->value <= 1.0))
      throw InvalidArgument("occlude: fraction must lie in [0, 1]");
    const auto w = static_cast<std::size_t>(std::llround(f->value * static_cast<double>(width)));
    return Rect{0, 0, w, w == 0 ? 0 : height};
  }
  const auto& r = std::get<Rect>(region);
  if (r.x > width || r.y > height || r.w > width - r.x || r.h > height - r.y)
    throw InvalidArgument("occlude: region outside the grid");
  return r;
}

HeightMap occlude(const HeightMap& map, const OcclusionParams& params) {
  if (map.empty()) throw InvalidArgument("occlude: empty map");
  const Rect r = resolve_region(params.region, map.width(), map.height());

  Image h = map.heights();
  Provenance prov = map.provenance();
  std::ostringstream os;
  os << "occlude x=" << r.x << " y=" << r.y << " w=" << r.w << " h=" << r.h
     << " fill=" << (params.fill == Fill::flat ? "flat" : "random");

  if (r.w > 0 && r.h > 0) {
    if (params.fill == Fill::flat) {
      for (std::size_t y = r.y; y < r.y + r.h; ++y)
        for (std::size_t x = r.x; x < r.x + r.w; ++x) h(x, y) = 0.0;
    } else {
      auto surface = params.fill_surface ? params.fill_surface : map.provenance().surface;
      if (!surface)
        throw InvalidArgument("occlude: random fill needs surface statistics (none in provenance)");
      SurfaceParams fresh = *surface;
      fresh.seed = derive_seed(params.seed, {0x0cc1u});
      HeightMap patch = generate_surface(fresh, map.width(), map.height(), map.pitch());
      for (std::size_t y = r.y; y < r.y + r.h; ++y)
        for (std::size_t x = r.x; x < r.x + r.w; ++x) h(x, y) = patch.heights()(x, y);
      os << " seed=" << params.seed;
    }
  }
  prov.history.push_back(os.str());
  return HeightMap(std::move(h), map.pitch(), std::move(prov));
}

}  // namespace ose

#include "ose/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace ose::fft {
namespace {

enum class Kind { c2c_forward, c2c_backward, r2c, c2r };

// FFTW planning is not thread-safe, execution with the new-array interface is.
// Plans are made with FFTW_ESTIMATE so the chosen algorithm (and therefore
// round-off) is identical from run to run.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, std::size_t width, std::size_t height) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(kind, width, height);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    const std::size_t half = width / 2 + 1;
    fftw_plan plan = nullptr;
    unsigned flags = FFTW_ESTIMATE;
    switch (kind) {
      case Kind::c2c_forward:
      case Kind::c2c_backward: {
        Grid<Complex> buf(width, height);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_2d(h, w, p, p, kind == Kind::c2c_forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                flags);
        break;
      }
      case Kind::r2c: {
        Image in(width, height);
        Grid<Complex> out(half, height);
        plan = fftw_plan_dft_r2c_2d(h, w, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                    flags);
        break;
      }
      case Kind::c2r: {
        Grid<Complex> in(half, height);
        Image out(width, height);
        plan = fftw_plan_dft_c2r_2d(h, w, reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    flags);
        break;
      }
    }
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Kind, std::size_t, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::size_t good_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

void forward(Grid<Complex>& g) {
  if (g.empty()) return;
  auto plan = cache().get(Kind::c2c_forward, g.width(), g.height());
  auto* p = reinterpret_cast<fftw_complex*>(g.data());
  fftw_execute_dft(plan, p, p);
}

void inverse(Grid<Complex>& g) {
  if (g.empty()) return;
  auto plan = cache().get(Kind::c2c_backward, g.width(), g.height());
  auto* p = reinterpret_cast<fftw_complex*>(g.data());
  fftw_execute_dft(plan, p, p);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : g) v *= scale;
}

Grid<Complex> forward_real(const Image& g) {
  Grid<Complex> out(g.width() / 2 + 1, g.height());
  if (g.empty()) return out;
  auto plan = cache().get(Kind::r2c, g.width(), g.height());
  // r2c does not modify its input for out-of-place transforms.
  fftw_execute_dft_r2c(plan, const_cast<double*>(g.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Image inverse_real(const Grid<Complex>& half_spectrum, std::size_t width) {
  if (half_spectrum.width() != width / 2 + 1)
    throw std::invalid_argument("inverse_real: spectrum width does not match");
  Image out(width, half_spectrum.height());
  if (out.empty()) return out;
  auto plan = cache().get(Kind::c2r, width, half_spectrum.height());
  // c2r destroys its input.
  Grid<Complex> scratch = half_spectrum;
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace ose::fft

#pragma once

#include <complex>
#include <cstddef>

#include "ose/grid.hpp"

namespace ose::fft {

using Complex = std::complex<double>;

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
std::size_t good_size(std::size_t n);

/// In-place forward 2D DFT, unnormalized.
void forward(Grid<Complex>& g);

/// In-place inverse 2D DFT, scaled by 1/N so that inverse(forward(x)) == x.
void inverse(Grid<Complex>& g);

/// Real-to-complex forward DFT. Result is the (width/2 + 1) x height half spectrum.
Grid<Complex> forward_real(const Image& g);

/// Inverse of forward_real, scaled by 1/N. `width` is the full real width.
Image inverse_real(const Grid<Complex>& half_spectrum, std::size_t width);

/// Signed frequency index for DFT bin k of an n-point transform.
inline long signed_bin(std::size_t k, std::size_t n) noexcept {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace ose::fft

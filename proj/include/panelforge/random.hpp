#pragma once

#include <cstdint>
#include <random>

#include "panelforge/matrix.hpp"

namespace panelforge {

/// Matrix with entries uniform in [lo, hi), generated column by column from
/// a 64-bit Mersenne Twister. The mapping from seed to values is fixed (53
/// random mantissa bits per entry), so the same seed reproduces the same
/// matrix bit for bit.
inline Matrix random_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = 0.0,
                             double hi = 1.0) {
  std::mt19937_64 gen(seed);
  Matrix m(rows, cols);
  const double width = hi - lo;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1p-53;
      m(i, j) = lo + width * u;
    }
  }
  return m;
}

}  // namespace panelforge

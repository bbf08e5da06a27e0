#pragma once

#include <cstddef>

#include "panelforge/matrix.hpp"

namespace panelforge {

/// 2x2 split of a matrix; the blocked algorithms grow `tl` from 0x0 until
/// it covers the whole operand.
struct Quadrants {
  MatrixView tl, tr;
  MatrixView bl, br;
};

/// 3x3 exposure of the current iteration: (a11; a21) is the panel,
/// (a12; a22) the trailing submatrix.
struct Partition3x3 {
  MatrixView a00, a01, a02;
  MatrixView a10, a11, a12;
  MatrixView a20, a21, a22;
};

/// Splits `a` with a top-left block of tl_rows x tl_cols.
/// Throws std::invalid_argument when the split point lies outside `a`.
Quadrants part_2x2(MatrixView a, std::size_t tl_rows, std::size_t tl_cols);

/// Exposes a square a11 of min(step, rows(br), cols(br)) from the top-left
/// corner of the bottom-right quadrant.
Partition3x3 repart_3x3(const Quadrants& q, std::size_t step);

/// Moves the boundary past a11: the new top-left quadrant absorbs
/// a00, a01, a10, a11.
Quadrants cont_with_3x3(const Partition3x3& p);

/// Loop guard of the blocked skeleton: n(A_TL) < n(A).
inline bool has_remaining(const Quadrants& q) { return q.br.cols() > 0 && q.br.rows() > 0; }

/// Column range [begin, begin + width) of panel k when n columns are
/// processed in steps of b (ragged final panel).
struct PanelRange {
  std::size_t begin = 0;
  std::size_t width = 0;
  std::size_t end() const { return begin + width; }
};

inline std::size_t panel_count(std::size_t n, std::size_t b) { return b == 0 ? 0 : (n + b - 1) / b; }

inline PanelRange panel_range(std::size_t n, std::size_t b, std::size_t k) {
  const std::size_t begin = k * b;
  if (begin >= n) return {n, 0};
  return {begin, (n - begin < b) ? n - begin : b};
}

}  // namespace panelforge

#include "panelforge/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace panelforge {

Quadrants part_2x2(MatrixView a, std::size_t tl_rows, std::size_t tl_cols) {
  if (tl_rows > a.rows() || tl_cols > a.cols()) {
    throw std::invalid_argument("part_2x2: split point outside the matrix");
  }
  const std::size_t br_rows = a.rows() - tl_rows;
  const std::size_t br_cols = a.cols() - tl_cols;
  return Quadrants{
      a.sub(0, 0, tl_rows, tl_cols),       a.sub(0, tl_cols, tl_rows, br_cols),
      a.sub(tl_rows, 0, br_rows, tl_cols), a.sub(tl_rows, tl_cols, br_rows, br_cols),
  };
}

Partition3x3 repart_3x3(const Quadrants& q, std::size_t step) {
  const std::size_t b = std::min({step, q.br.rows(), q.br.cols()});
  const std::size_t r2 = q.br.rows() - b;
  const std::size_t c2 = q.br.cols() - b;
  const std::size_t r0 = q.tl.rows();
  const std::size_t c0 = q.tl.cols();
  return Partition3x3{
      q.tl,                  q.tr.sub(0, 0, r0, b), q.tr.sub(0, b, r0, c2),
      q.bl.sub(0, 0, b, c0), q.br.sub(0, 0, b, b),  q.br.sub(0, b, b, c2),
      q.bl.sub(b, 0, r2, c0), q.br.sub(b, 0, r2, b), q.br.sub(b, b, r2, c2),
  };
}

namespace {

// Smallest view of the same root that covers both (adjacent) views.
MatrixView join(const MatrixView& a, const MatrixView& b, bool vertical) {
  if (vertical) {
    return MatrixView(a.root(), a.ld(), a.row_off(), a.col_off(), a.rows() + b.rows(), a.cols());
  }
  return MatrixView(a.root(), a.ld(), a.row_off(), a.col_off(), a.rows(), a.cols() + b.cols());
}

}  // namespace

Quadrants cont_with_3x3(const Partition3x3& p) {
  const MatrixView top = join(p.a00, p.a01, false);
  const MatrixView mid = join(p.a10, p.a11, false);
  MatrixView tl = join(top, mid, true);
  MatrixView tr = join(p.a02, p.a12, true);
  MatrixView bl = join(p.a20, p.a21, false);
  // Zero-extent pieces still carry the right offsets, which keeps join()
  // valid at the start and end of the sweep.
  return Quadrants{tl, tr, bl, p.a22};
}

}  // namespace panelforge

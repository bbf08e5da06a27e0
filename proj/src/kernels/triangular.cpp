#include <algorithm>
#include <stdexcept>

#include "panelforge/kernels.hpp"

namespace panelforge::kernels {

namespace {

// Row block of the blocked forward substitution. Fixed so that the
// arithmetic applied to a column never depends on how many columns are
// solved together.
constexpr std::size_t kTrsmBlock = 64;
// Columns per parallel_for chunk in the column-independent kernels.
constexpr std::size_t kColumnChunk = 16;

void check_square(ConstMatrixView t, ConstMatrixView x, const char* what) {
  if (t.rows() != t.cols()) throw std::invalid_argument(std::string(what) + ": triangular factor must be square");
  if (x.rows() != t.rows()) throw std::invalid_argument(std::string(what) + ": right-hand side row count mismatch");
}

// Unblocked column-oriented forward substitution on columns [j0, j1).
void forward_unit(ConstMatrixView l, MatrixView x, std::size_t j0, std::size_t j1) {
  const std::size_t n = l.rows();
  for (std::size_t j = j0; j < j1; ++j) {
    double* xj = x.col(j);
    for (std::size_t p = 0; p < n; ++p) {
      const double xp = xj[p];
      if (xp == 0.0) continue;
      const double* lp = l.col(p);
      for (std::size_t i = p + 1; i < n; ++i) xj[i] -= xp * lp[i];
    }
  }
}

}  // namespace

void trsm_llnu(ConstMatrixView a11, MatrixView x, const CacheConfig& cfg, Pool& pool, const MalleableTeam& team) {
  check_square(a11, x, "trsm_llnu");
  const std::size_t n = a11.rows();
  if (n == 0 || x.cols() == 0) return;
  pool.run([&] {
    for (std::size_t ib = 0; ib < n; ib += kTrsmBlock) {
      const std::size_t nb = std::min(kTrsmBlock, n - ib);
      const ConstMatrixView l11 = a11.sub(ib, ib, nb, nb);
      const MatrixView x1 = x.sub(ib, 0, nb, x.cols());
      parallel_for(pool, team, {0, x.cols(), kColumnChunk}, [&](std::size_t j0, std::size_t) {
        forward_unit(l11, x1, j0, std::min(j0 + kColumnChunk, x.cols()));
      });
      const std::size_t rest = n - ib - nb;
      if (rest > 0) {
        gemm_sub(x.sub(ib + nb, 0, rest, x.cols()), a11.sub(ib + nb, ib, rest, nb), x1, Transpose::none,
                 Transpose::none, cfg, pool, team);
      }
    }
  });
}

void trmm_ut(ConstMatrixView t, MatrixView x, Pool& pool, const MalleableTeam& team) {
  check_square(t, x, "trmm_ut");
  const std::size_t n = t.rows();
  if (n == 0 || x.cols() == 0) return;
  parallel_for(pool, team, {0, x.cols(), kColumnChunk}, [&](std::size_t j0, std::size_t) {
    const std::size_t j1 = std::min(j0 + kColumnChunk, x.cols());
    for (std::size_t j = j0; j < j1; ++j) {
      double* xj = x.col(j);
      // x(i) only depends on x(i..n-1), so ascending i can overwrite in place.
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t p = i; p < n; ++p) s += t(i, p) * xj[p];
        xj[i] = s;
      }
    }
  });
}

void trmm_ut_trans(ConstMatrixView t, MatrixView x, Pool& pool, const MalleableTeam& team) {
  check_square(t, x, "trmm_ut_trans");
  const std::size_t n = t.rows();
  if (n == 0 || x.cols() == 0) return;
  parallel_for(pool, team, {0, x.cols(), kColumnChunk}, [&](std::size_t j0, std::size_t) {
    const std::size_t j1 = std::min(j0 + kColumnChunk, x.cols());
    for (std::size_t j = j0; j < j1; ++j) {
      double* xj = x.col(j);
      // (T^T x)(i) = sum_{p <= i} T(p, i) x(p); descending i keeps x(0..i) intact.
      for (std::size_t i = n; i-- > 0;) {
        const double* ti = t.col(i);
        double s = 0.0;
        for (std::size_t p = 0; p <= i; ++p) s += ti[p] * xj[p];
        xj[i] = s;
      }
    }
  });
}

void laswp(MatrixView a, std::span<const std::int64_t> ipiv, std::size_t k1, std::size_t k2, Pool& pool,
           const MalleableTeam& team, PivotOrder order) {
  if (k1 > k2 || k2 > ipiv.size()) throw std::out_of_range("laswp: pivot range outside ipiv");
  for (std::size_t i = k1; i < k2; ++i) {
    if (i >= a.rows() || ipiv[i] < 1 || static_cast<std::size_t>(ipiv[i]) > a.rows()) {
      throw std::out_of_range("laswp: pivot index outside the matrix");
    }
  }
  if (k1 == k2 || a.cols() == 0) return;
  constexpr std::size_t kSwapChunk = 32;
  parallel_for(pool, team, {0, a.cols(), kSwapChunk}, [&](std::size_t j0, std::size_t) {
    const std::size_t j1 = std::min(j0 + kSwapChunk, a.cols());
    const auto swap_rows = [&](std::size_t i) {
      const std::size_t p = static_cast<std::size_t>(ipiv[i]) - 1;
      if (p == i) return;
      for (std::size_t j = j0; j < j1; ++j) std::swap(a(i, j), a(p, j));
    };
    if (order == PivotOrder::forward) {
      for (std::size_t i = k1; i < k2; ++i) swap_rows(i);
    } else {
      for (std::size_t i = k2; i-- > k1;) swap_rows(i);
    }
  });
}

}  // namespace panelforge::kernels

#include "panelforge/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace panelforge::oracle {

using kernels::Transpose;

void naive_gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb) {
  const std::size_t am = ta == Transpose::none ? a.rows() : a.cols();
  const std::size_t k = ta == Transpose::none ? a.cols() : a.rows();
  const std::size_t bk = tb == Transpose::none ? b.rows() : b.cols();
  const std::size_t bn = tb == Transpose::none ? b.cols() : b.rows();
  if (am != c.rows() || bn != c.cols() || k != bk) throw std::invalid_argument("naive_gemm: non-conformal operands");
  const auto op_a = [&](std::size_t i, std::size_t p) { return ta == Transpose::none ? a(i, p) : a(p, i); };
  const auto op_b = [&](std::size_t p, std::size_t j) { return tb == Transpose::none ? b(p, j) : b(j, p); };
  for (std::size_t j = 0; j < c.cols(); ++j) {
    for (std::size_t i = 0; i < c.rows(); ++i) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += op_a(i, p) * op_b(p, j);
      c(i, j) += s;
    }
  }
}

void apply_pivots(MatrixView a, std::span<const std::int64_t> ipiv) {
  for (std::size_t i = 0; i < ipiv.size(); ++i) {
    if (ipiv[i] < 1 || static_cast<std::size_t>(ipiv[i]) > a.rows()) {
      throw std::out_of_range("apply_pivots: pivot outside the matrix");
    }
    const std::size_t p = static_cast<std::size_t>(ipiv[i]) - 1;
    if (p == i) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(i, j), a(p, j));
  }
}

namespace {

double normalized(double residual_norm, double scale) {
  if (scale == 0.0) return residual_norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return residual_norm / scale;
}

}  // namespace

double lu_residual(ConstMatrixView original, ConstMatrixView factors, std::span<const std::int64_t> pivots) {
  const std::size_t m = original.rows();
  const std::size_t n = original.cols();
  if (factors.rows() != m || factors.cols() != n) throw std::invalid_argument("lu_residual: shape mismatch");
  const std::size_t r = std::min(m, n);
  if (r == 0) return 0.0;

  Matrix diff = Matrix::from(original);
  apply_pivots(diff.view(), pivots);
  // diff -= L U, column by column: (LU)(:, j) = sum_{p <= min(j, r-1)} L(:, p) U(p, j)
  for (std::size_t j = 0; j < n; ++j) {
    double* dj = &diff(0, j);
    for (std::size_t p = 0; p <= std::min(j, r - 1); ++p) {
      const double u = factors(p, j);
      if (u == 0.0) continue;
      dj[p] -= u;  // L(p, p) = 1
      for (std::size_t i = p + 1; i < m; ++i) dj[i] -= factors(i, p) * u;
    }
  }
  const double scale = static_cast<double>(std::max(m, n)) * unit_roundoff * frobenius_norm(original);
  return normalized(frobenius_norm(diff.view()), scale);
}

Matrix form_q(ConstMatrixView factors, std::span<const double> tau) {
  const std::size_t m = factors.rows();
  Matrix q = Matrix::identity(m);
  // Q = H_0 (H_1 (... (H_{k-1} I)))
  for (std::size_t jj = tau.size(); jj-- > 0;) {
    const double t = tau[jj];
    if (t == 0.0) continue;
    for (std::size_t c = 0; c < m; ++c) {
      double w = q(jj, c);
      for (std::size_t i = jj + 1; i < m; ++i) w += factors(i, jj) * q(i, c);
      const double s = t * w;
      q(jj, c) -= s;
      for (std::size_t i = jj + 1; i < m; ++i) q(i, c) -= s * factors(i, jj);
    }
  }
  return q;
}

QrResiduals qr_residual(ConstMatrixView original, ConstMatrixView factors, std::span<const double> tau) {
  const std::size_t m = original.rows();
  const std::size_t n = original.cols();
  if (factors.rows() != m || factors.cols() != n) throw std::invalid_argument("qr_residual: shape mismatch");
  const Matrix q = form_q(factors, tau);

  Matrix diff = Matrix::from(original);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p <= j && p < m; ++p) {
      const double rpj = factors(p, j);
      if (rpj == 0.0) continue;
      for (std::size_t i = 0; i < m; ++i) diff(i, j) -= q(i, p) * rpj;
    }
  }

  Matrix gram(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t p = 0; p < m; ++p) s += q(p, i) * q(p, j);
      gram(i, j) = s - (i == j ? 1.0 : 0.0);
    }
  }

  QrResiduals out;
  const double dim = static_cast<double>(std::max(m, n));
  out.factor = normalized(frobenius_norm(diff.view()), dim * unit_roundoff * frobenius_norm(original));
  out.orthogonality = frobenius_norm(gram.view()) / (static_cast<double>(m) * unit_roundoff);
  return out;
}

}  // namespace panelforge::oracle

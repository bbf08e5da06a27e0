#pragma once

#include <cstdint>
#include <span>

#include "panelforge/kernels.hpp"
#include "panelforge/matrix.hpp"

// Slow, single-threaded reference implementations. Every accuracy bound in
// the test suites is stated against these routines.
namespace panelforge::oracle {

/// Unit roundoff of IEEE double, 2^-53.
inline constexpr double unit_roundoff = 0x1p-53;

/// c(i, j) += s with s = sum_p op(a)(i, p) * op(b)(p, j) accumulated from
/// zero in ascending p. Throws std::invalid_argument on non-conformal shapes.
void naive_gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, kernels::Transpose ta = kernels::Transpose::none,
                kernels::Transpose tb = kernels::Transpose::none);

/// Applies LAPACK-style 1-based row interchanges in order, one row pair at a
/// time over all columns.
void apply_pivots(MatrixView a, std::span<const std::int64_t> ipiv);

/// ||P A - L U||_F / (n u ||A||_F) with n = max(rows, cols).
double lu_residual(ConstMatrixView original, ConstMatrixView factors, std::span<const std::int64_t> pivots);

struct QrResiduals {
  double factor = 0.0;         // ||A - Q R||_F / (n u ||A||_F)
  double orthogonality = 0.0;  // ||Q^T Q - I||_F / (n u), n = rows
};

/// Q = H_0 H_1 ... H_{k-1} as an explicit rows x rows matrix, each H_j
/// applied as a single reflector.
Matrix form_q(ConstMatrixView factors, std::span<const double> tau);

QrResiduals qr_residual(ConstMatrixView original, ConstMatrixView factors, std::span<const double> tau);

}  // namespace panelforge::oracle

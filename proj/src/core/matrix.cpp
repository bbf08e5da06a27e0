#include "panelforge/matrix.hpp"

#include <cmath>
#include <cstring>

namespace panelforge {

bool bitwise_equal(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    if (a.rows() == 0) break;
    if (std::memcmp(a.col(j), b.col(j), a.rows() * sizeof(double)) != 0) return false;
  }
  return true;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) { return bitwise_equal(a.view(), b.view()); }

double frobenius_norm(ConstMatrixView a) {
  // scaled sum of squares, as in LAPACK's dlassq
  double scale = 0.0;
  double ssq = 1.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      if (v == 0.0) continue;
      const double av = std::fabs(v);
      if (scale < av) {
        ssq = 1.0 + ssq * (scale / av) * (scale / av);
        scale = av;
      } else {
        ssq += (av / scale) * (av / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

}  // namespace panelforge

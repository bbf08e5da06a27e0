#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "panelforge/factor.hpp"

namespace panelforge::factor {

namespace {

// Euclidean norm with scaling against overflow (dnrm2 reference algorithm).
double nrm2(std::span<const double> x) {
  double scale = 0.0;
  double ssq = 1.0;
  for (const double v : x) {
    if (v == 0.0) continue;
    const double av = std::fabs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

}  // namespace

PanelPivots lu_unb(MatrixView panel, std::size_t row_base) {
  const std::size_t m = panel.rows();
  const std::size_t n = panel.cols();
  PanelPivots out;
  const std::size_t steps = std::min(m, n);
  out.pivots.resize(steps);
  constexpr double sfmin = DBL_MIN;

  for (std::size_t j = 0; j < steps; ++j) {
    double* cj = panel.col(j);
    std::size_t p = j;
    double best = std::fabs(cj[j]);
    for (std::size_t i = j + 1; i < m; ++i) {
      const double v = std::fabs(cj[i]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    out.pivots[j] = static_cast<std::int64_t>(row_base + p + 1);

    if (cj[p] != 0.0) {
      if (p != j) {
        for (std::size_t c = 0; c < n; ++c) std::swap(panel(j, c), panel(p, c));
      }
      const double pivot = cj[j];
      if (std::fabs(pivot) >= sfmin) {
        const double r = 1.0 / pivot;
        for (std::size_t i = j + 1; i < m; ++i) cj[i] *= r;
      } else {
        for (std::size_t i = j + 1; i < m; ++i) cj[i] /= pivot;
      }
    } else if (out.info == 0) {
      out.info = static_cast<std::int64_t>(j + 1);
    }

    // rank-1 update of the trailing panel columns
    for (std::size_t c = j + 1; c < n; ++c) {
      double* cc = panel.col(c);
      const double u = cc[j];
      if (u == 0.0) continue;
      for (std::size_t i = j + 1; i < m; ++i) cc[i] -= cj[i] * u;
    }
  }
  return out;
}

double householder(std::span<double> x) {
  if (x.empty()) return 0.0;
  double alpha = x[0];
  const std::span<double> tail = x.subspan(1);
  double xnorm = nrm2(tail);
  if (xnorm == 0.0) return 0.0;

  double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  const double safmin = DBL_MIN / (DBL_EPSILON / 2);
  const double rsafmn = 1.0 / safmin;
  int knt = 0;
  if (std::fabs(beta) < safmin) {
    // beta may be inaccurate: rescale x and recompute
    do {
      ++knt;
      for (double& v : tail) v *= rsafmn;
      beta *= rsafmn;
      alpha *= rsafmn;
    } while (std::fabs(beta) < safmin && knt < 20);
    xnorm = nrm2(tail);
    beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  }
  const double tau = (beta - alpha) / beta;
  const double scal = 1.0 / (alpha - beta);
  for (double& v : tail) v *= scal;
  for (int i = 0; i < knt; ++i) beta *= safmin;
  x[0] = beta;
  return tau;
}

std::vector<double> qr_unb(MatrixView panel) {
  const std::size_t m = panel.rows();
  const std::size_t n = panel.cols();
  if (m < n) throw std::invalid_argument("qr_unb: panel must have at least as many rows as columns");
  std::vector<double> tau(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = panel.col(j);
    tau[j] = householder(std::span<double>(cj + j, m - j));
    if (tau[j] == 0.0) continue;
    // apply H_j = I - tau v v^T to columns j+1..n-1 (v(0) = 1)
    for (std::size_t c = j + 1; c < n; ++c) {
      double* cc = panel.col(c);
      double w = cc[j];
      for (std::size_t i = j + 1; i < m; ++i) w += cj[i] * cc[i];
      const double s = tau[j] * w;
      cc[j] -= s;
      for (std::size_t i = j + 1; i < m; ++i) cc[i] -= s * cj[i];
    }
  }
  return tau;
}

Matrix larft_forward_columnwise(ConstMatrixView v, std::span<const double> tau) {
  const std::size_t k = tau.size();
  const std::size_t m = v.rows();
  if (v.cols() < k || m < k) throw std::invalid_argument("larft: panel holds fewer reflectors than tau");
  Matrix t(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    t(j, j) = tau[j];
    if (tau[j] == 0.0) continue;  // column j of T stays zero
    // t(0:j, j) = -tau_j * V(:, 0:j)^T v_j, using v_j(j) = 1, v_j(<j) = 0
    for (std::size_t i = 0; i < j; ++i) {
      double s = v(j, i);
      for (std::size_t r = j + 1; r < m; ++r) s += v(r, i) * v(r, j);
      t(i, j) = -tau[j] * s;
    }
    // t(0:j, j) = T(0:j, 0:j) * t(0:j, j)
    for (std::size_t i = 0; i < j; ++i) {
      double s = 0.0;
      for (std::size_t p = i; p < j; ++p) s += t(i, p) * t(p, j);
      t(i, j) = s;
    }
  }
  return t;
}

BlockReflector make_block_reflector(ConstMatrixView panel, std::span<const double> tau) {
  const std::size_t m = panel.rows();
  const std::size_t k = tau.size();
  BlockReflector h{Matrix(m, k), larft_forward_columnwise(panel, tau)};
  for (std::size_t j = 0; j < k; ++j) {
    h.v(j, j) = 1.0;
    for (std::size_t i = j + 1; i < m; ++i) h.v(i, j) = panel(i, j);
  }
  return h;
}

void apply_block_reflector(const BlockReflector& h, MatrixView c, const CacheConfig& cfg, Pool& pool,
                           const MalleableTeam& team) {
  const std::size_t k = h.t.rows();
  if (c.rows() != h.v.rows()) throw std::invalid_argument("apply_block_reflector: row count mismatch");
  if (k == 0 || c.empty()) return;
  Matrix w(k, c.cols());
  kernels::gemm(w.view(), h.v.view(), c, kernels::Transpose::transpose, kernels::Transpose::none, cfg, pool, team);
  kernels::trmm_ut_trans(h.t.view(), w.view(), pool, team);
  kernels::gemm_sub(c, h.v.view(), w.view(), kernels::Transpose::none, kernels::Transpose::none, cfg, pool, team);
}

}  // namespace panelforge::factor

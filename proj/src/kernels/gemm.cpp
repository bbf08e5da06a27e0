#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "panelforge/kernels.hpp"

namespace panelforge::kernels {

namespace {

// Register tile with compile-time extents. acc is column-major in the tile
// so the inner loop runs over the mr contiguous values of the A sliver.
template <std::size_t MR, std::size_t NR>
void micro_kernel_fixed(std::size_t kc, const double* __restrict a, const double* __restrict b, MatrixView c) {
  alignas(64) double acc[NR][MR] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const double* ap = a + p * MR;
    const double* bp = b + p * NR;
    for (std::size_t j = 0; j < NR; ++j) {
      const double bj = bp[j];
      for (std::size_t i = 0; i < MR; ++i) acc[j][i] += ap[i] * bj;
    }
  }
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  if (m == MR && n == NR) {
    for (std::size_t j = 0; j < NR; ++j) {
      double* cj = c.col(j);
      for (std::size_t i = 0; i < MR; ++i) cj[i] += acc[j][i];
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      double* cj = c.col(j);
      for (std::size_t i = 0; i < m; ++i) cj[i] += acc[j][i];
    }
  }
}

void micro_kernel_generic(std::size_t mr, std::size_t nr, std::size_t kc, const double* a, const double* b,
                          MatrixView c) {
  constexpr std::size_t kStack = 512;
  std::array<double, kStack> local{};
  std::vector<double> heap;
  double* acc = local.data();
  if (mr * nr > kStack) {
    heap.assign(mr * nr, 0.0);
    acc = heap.data();
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const double* ap = a + p * mr;
    const double* bp = b + p * nr;
    for (std::size_t j = 0; j < nr; ++j) {
      const double bj = bp[j];
      double* accj = acc + j * mr;
      for (std::size_t i = 0; i < mr; ++i) accj[i] += ap[i] * bj;
    }
  }
  for (std::size_t j = 0; j < c.cols(); ++j) {
    double* cj = c.col(j);
    for (std::size_t i = 0; i < c.rows(); ++i) cj[i] += acc[j * mr + i];
  }
}

struct Shape {
  std::size_t m, n, k;
};

Shape conformal_shape(ConstMatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb) {
  const std::size_t am = ta == Transpose::none ? a.rows() : a.cols();
  const std::size_t ak = ta == Transpose::none ? a.cols() : a.rows();
  const std::size_t bk = tb == Transpose::none ? b.rows() : b.cols();
  const std::size_t bn = tb == Transpose::none ? b.cols() : b.rows();
  if (am != c.rows() || bn != c.cols() || ak != bk) {
    throw std::invalid_argument("gemm: operand dimensions are not conformal");
  }
  return {c.rows(), c.cols(), ak};
}

void gemm_impl(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb,
               const CacheConfig& cfg, Pool& pool, const MalleableTeam& team, const GemmHooks* hooks, bool negate) {
  cfg.validate();
  const Shape s = conformal_shape(c, a, b, ta, tb);
  if (s.m == 0 || s.n == 0 || s.k == 0) return;

  pool.run([&] {
    const std::size_t mr = cfg.mr;
    const std::size_t nr = cfg.nr;
    PackedPanelA ac = make_packed_a(std::min(cfg.mc, s.m), std::min(cfg.kc, s.k), mr);
    PackedPanelB bc = make_packed_b(std::min(cfg.kc, s.k), std::min(cfg.nc, s.n), nr);

    for (std::size_t jc = 0; jc < s.n; jc += cfg.nc) {  // Loop 1
      const std::size_t nc_eff = std::min(cfg.nc, s.n - jc);
      for (std::size_t pc = 0; pc < s.k; pc += cfg.kc) {  // Loop 2
        const std::size_t kc_eff = std::min(cfg.kc, s.k - pc);
        bc.kc_eff = kc_eff;
        bc.nc_eff = nc_eff;
        const std::size_t b_slivers = bc.slivers();
        parallel_for(pool, team, {0, b_slivers, 1},
                     [&](std::size_t sl, std::size_t) { pack_b_slivers(bc, b, tb, pc, jc, sl, sl + 1); });

        for (std::size_t ic = 0; ic < s.m; ic += cfg.mc) {  // Loop 3
          if (hooks != nullptr && hooks->loop3) hooks->loop3(ic);
          const std::size_t mc_eff = std::min(cfg.mc, s.m - ic);
          ac.mc_eff = mc_eff;
          ac.kc_eff = kc_eff;
          const std::size_t a_slivers = ac.slivers();
          parallel_for(pool, team, {0, a_slivers, 1},
                       [&](std::size_t sl, std::size_t) { pack_a_slivers(ac, a, ta, ic, pc, sl, sl + 1, negate); });

          // Macro-kernel: Loop 4 over the team, Loop 5 inside each chunk.
          parallel_for(pool, team, {0, b_slivers, 1}, [&](std::size_t jr, std::size_t) {
            const std::size_t j0 = jr * nr;
            const std::size_t cols = std::min(nr, nc_eff - j0);
            for (std::size_t ir = 0; ir < a_slivers; ++ir) {
              const std::size_t i0 = ir * mr;
              const std::size_t rows = std::min(mr, mc_eff - i0);
              micro_kernel(mr, nr, kc_eff, ac.sliver(ir), bc.sliver(jr), c.sub(ic + i0, jc + j0, rows, cols));
            }
          });
        }
      }
    }
  });
}

}  // namespace

void micro_kernel(std::size_t mr, std::size_t nr, std::size_t kc, const double* a, const double* b, MatrixView c_tile) {
  if (c_tile.rows() > mr || c_tile.cols() > nr) throw std::invalid_argument("micro_kernel: tile exceeds mr x nr");
  if (kc == 0) return;
  if (mr == 8 && nr == 6) {
    micro_kernel_fixed<8, 6>(kc, a, b, c_tile);
  } else if (mr == 4 && nr == 4) {
    micro_kernel_fixed<4, 4>(kc, a, b, c_tile);
  } else {
    micro_kernel_generic(mr, nr, kc, a, b, c_tile);
  }
}

void gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb, const CacheConfig& cfg,
          Pool& pool, const MalleableTeam& team, const GemmHooks* hooks) {
  gemm_impl(c, a, b, ta, tb, cfg, pool, team, hooks, false);
}

void gemm_sub(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb,
              const CacheConfig& cfg, Pool& pool, const MalleableTeam& team, const GemmHooks* hooks) {
  gemm_impl(c, a, b, ta, tb, cfg, pool, team, hooks, true);
}

}  // namespace panelforge::kernels

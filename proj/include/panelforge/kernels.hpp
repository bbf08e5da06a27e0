#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include "panelforge/config.hpp"
#include "panelforge/matrix.hpp"
#include "panelforge/runtime.hpp"

namespace panelforge::kernels {

enum class Transpose { none, transpose };

/// Contiguous, 64-byte aligned scratch of doubles.
class AlignedBuffer {
 public:
  AlignedBuffer() = default;
  explicit AlignedBuffer(std::size_t count);
  double* data() { return data_.get(); }
  const double* data() const { return data_.get(); }
  std::size_t size() const { return size_; }

 private:
  struct Free {
    void operator()(double* p) const;
  };
  std::unique_ptr<double[], Free> data_;
  std::size_t size_ = 0;
};

/// Packed copy of an mc x kc block of op(A): ceil(mc/mr) row slivers, each
/// an mr x kc block stored column by column (mr consecutive values per p).
/// Rows past mc_eff in the last sliver are zero.
struct PackedPanelA {
  AlignedBuffer buffer;
  std::size_t mr = 0;
  std::size_t mc_eff = 0;
  std::size_t kc_eff = 0;

  std::size_t slivers() const { return (mc_eff + mr - 1) / mr; }
  const double* sliver(std::size_t s) const { return buffer.data() + s * mr * kc_eff; }
  double* sliver(std::size_t s) { return buffer.data() + s * mr * kc_eff; }
  /// Element (i, p) of the packed block, i < slivers()*mr.
  double at(std::size_t i, std::size_t p) const { return sliver(i / mr)[p * mr + i % mr]; }
};

/// Packed copy of a kc x nc block of op(B): ceil(nc/nr) column slivers, each
/// a kc x nr block stored row by row (nr consecutive values per p).
/// Columns past nc_eff in the last sliver are zero.
struct PackedPanelB {
  AlignedBuffer buffer;
  std::size_t nr = 0;
  std::size_t kc_eff = 0;
  std::size_t nc_eff = 0;

  std::size_t slivers() const { return (nc_eff + nr - 1) / nr; }
  const double* sliver(std::size_t s) const { return buffer.data() + s * nr * kc_eff; }
  double* sliver(std::size_t s) { return buffer.data() + s * nr * kc_eff; }
  double at(std::size_t p, std::size_t j) const { return sliver(j / nr)[p * nr + j % nr]; }
};

/// Allocates a panel able to hold an mc x kc block with register height mr.
PackedPanelA make_packed_a(std::size_t mc, std::size_t kc, std::size_t mr);
PackedPanelB make_packed_b(std::size_t kc, std::size_t nc, std::size_t nr);

/// Packs slivers [first, last) of op(A)(ic : ic+mc_eff, pc : pc+kc_eff).
/// `negate` stores -op(A) (exact) for the subtracting update.
void pack_a_slivers(PackedPanelA& dst, ConstMatrixView a, Transpose ta, std::size_t ic, std::size_t pc,
                    std::size_t first, std::size_t last, bool negate = false);
void pack_b_slivers(PackedPanelB& dst, ConstMatrixView b, Transpose tb, std::size_t pc, std::size_t jc,
                    std::size_t first, std::size_t last);

/// Sequential convenience wrappers packing every sliver.
void pack_a(PackedPanelA& dst, ConstMatrixView a, Transpose ta, std::size_t ic, std::size_t pc, std::size_t mc_eff,
            std::size_t kc_eff);
void pack_b(PackedPanelB& dst, ConstMatrixView b, Transpose tb, std::size_t pc, std::size_t jc, std::size_t kc_eff,
            std::size_t nc_eff);

/// c_tile += sum_p a(:, p) * b(p, :) over p = 0..kc-1 in ascending order.
/// `a` is an mr x kc sliver (mr values per p), `b` a kc x nr sliver (nr
/// values per p). The product is accumulated from zero in a local tile and
/// then added to C; only the c_tile.rows() x c_tile.cols() corner is stored.
void micro_kernel(std::size_t mr, std::size_t nr, std::size_t kc, const double* a, const double* b, MatrixView c_tile);

/// Optional instrumentation of the Loop-3 boundary of gemm. The hook runs on
/// the calling worker right before the team size is read for that
/// iteration, so a promote() issued from it is observed immediately.
struct GemmHooks {
  std::function<void(std::size_t ic)> loop3;
};

/// C += op(A) * op(B). Loop order jc -> pc -> ic -> jr -> ir; jr (Loop 4)
/// and both packing steps are distributed over the team, whose size is
/// re-read at every encounter. Throws std::invalid_argument on
/// non-conformal operands.
void gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb, const CacheConfig& cfg,
          Pool& pool, const MalleableTeam& team, const GemmHooks* hooks = nullptr);

/// C -= op(A) * op(B); identical arithmetic to gemm with -op(A) packed.
void gemm_sub(MatrixView c, ConstMatrixView a, ConstMatrixView b, Transpose ta, Transpose tb,
              const CacheConfig& cfg, Pool& pool, const MalleableTeam& team, const GemmHooks* hooks = nullptr);

/// X := inv(L) * X with L the unit lower triangle of `a11` (upper part and
/// diagonal not referenced).
void trsm_llnu(ConstMatrixView a11, MatrixView x, const CacheConfig& cfg, Pool& pool, const MalleableTeam& team);

/// X := T * X with T the upper triangle of `t` (strict lower part ignored).
void trmm_ut(ConstMatrixView t, MatrixView x, Pool& pool, const MalleableTeam& team);

/// X := T^T * X with T the upper triangle of `t`.
void trmm_ut_trans(ConstMatrixView t, MatrixView x, Pool& pool, const MalleableTeam& team);

enum class PivotOrder { forward, reverse };

/// Row interchanges with LAPACK ipiv semantics: for i in [k1, k2) (ascending
/// for forward, descending for reverse) row i of `a` is swapped with row
/// ipiv[i] - 1. Columns are distributed over the team. Throws
/// std::out_of_range when a pivot leaves the view.
void laswp(MatrixView a, std::span<const std::int64_t> ipiv, std::size_t k1, std::size_t k2, Pool& pool,
           const MalleableTeam& team, PivotOrder order = PivotOrder::forward);

}  // namespace panelforge::kernels

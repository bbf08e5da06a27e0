#include <algorithm>
#include <cstdlib>
#include <new>
#include <stdexcept>

#include "panelforge/kernels.hpp"

namespace panelforge::kernels {

AlignedBuffer::AlignedBuffer(std::size_t count) : size_(count) {
  if (count == 0) return;
  constexpr std::size_t kAlign = 64;
  const std::size_t bytes = (count * sizeof(double) + kAlign - 1) / kAlign * kAlign;
  void* p = std::aligned_alloc(kAlign, bytes);
  if (p == nullptr) throw std::bad_alloc();
  data_.reset(static_cast<double*>(p));
}

void AlignedBuffer::Free::operator()(double* p) const { std::free(p); }

PackedPanelA make_packed_a(std::size_t mc, std::size_t kc, std::size_t mr) {
  PackedPanelA p;
  p.mr = mr;
  p.buffer = AlignedBuffer(((mc + mr - 1) / mr) * mr * kc);
  return p;
}

PackedPanelB make_packed_b(std::size_t kc, std::size_t nc, std::size_t nr) {
  PackedPanelB p;
  p.nr = nr;
  p.buffer = AlignedBuffer(((nc + nr - 1) / nr) * nr * kc);
  return p;
}

void pack_a_slivers(PackedPanelA& dst, ConstMatrixView a, Transpose ta, std::size_t ic, std::size_t pc,
                    std::size_t first, std::size_t last, bool negate) {
  const std::size_t mr = dst.mr;
  const std::size_t kc = dst.kc_eff;
  const double sign = negate ? -1.0 : 1.0;
  for (std::size_t s = first; s < last; ++s) {
    double* out = dst.sliver(s);
    const std::size_t i0 = s * mr;
    const std::size_t rows = std::min(mr, dst.mc_eff - i0);
    if (ta == Transpose::none) {
      for (std::size_t p = 0; p < kc; ++p) {
        const double* src = a.col(pc + p) + ic + i0;
        double* o = out + p * mr;
        for (std::size_t i = 0; i < rows; ++i) o[i] = sign * src[i];
        for (std::size_t i = rows; i < mr; ++i) o[i] = 0.0;
      }
    } else {
      // op(A)(i, p) = A(p, i): walk the stored columns i for contiguous p.
      for (std::size_t i = 0; i < rows; ++i) {
        const double* src = a.col(ic + i0 + i) + pc;
        for (std::size_t p = 0; p < kc; ++p) out[p * mr + i] = sign * src[p];
      }
      for (std::size_t p = 0; p < kc; ++p)
        for (std::size_t i = rows; i < mr; ++i) out[p * mr + i] = 0.0;
    }
  }
}

void pack_b_slivers(PackedPanelB& dst, ConstMatrixView b, Transpose tb, std::size_t pc, std::size_t jc,
                    std::size_t first, std::size_t last) {
  const std::size_t nr = dst.nr;
  const std::size_t kc = dst.kc_eff;
  for (std::size_t s = first; s < last; ++s) {
    double* out = dst.sliver(s);
    const std::size_t j0 = s * nr;
    const std::size_t cols = std::min(nr, dst.nc_eff - j0);
    if (tb == Transpose::none) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double* src = b.col(jc + j0 + j) + pc;
        for (std::size_t p = 0; p < kc; ++p) out[p * nr + j] = src[p];
      }
    } else {
      // op(B)(p, j) = B(j, p)
      for (std::size_t p = 0; p < kc; ++p) {
        const double* src = b.col(pc + p) + jc + j0;
        for (std::size_t j = 0; j < cols; ++j) out[p * nr + j] = src[j];
      }
    }
    for (std::size_t p = 0; p < kc; ++p)
      for (std::size_t j = cols; j < nr; ++j) out[p * nr + j] = 0.0;
  }
}

void pack_a(PackedPanelA& dst, ConstMatrixView a, Transpose ta, std::size_t ic, std::size_t pc, std::size_t mc_eff,
            std::size_t kc_eff) {
  dst.mc_eff = mc_eff;
  dst.kc_eff = kc_eff;
  if (dst.slivers() * dst.mr * kc_eff > dst.buffer.size()) {
    throw std::length_error("pack_a: block exceeds packed buffer capacity");
  }
  pack_a_slivers(dst, a, ta, ic, pc, 0, dst.slivers());
}

void pack_b(PackedPanelB& dst, ConstMatrixView b, Transpose tb, std::size_t pc, std::size_t jc, std::size_t kc_eff,
            std::size_t nc_eff) {
  dst.kc_eff = kc_eff;
  dst.nc_eff = nc_eff;
  if (dst.slivers() * dst.nr * kc_eff > dst.buffer.size()) {
    throw std::length_error("pack_b: block exceeds packed buffer capacity");
  }
  pack_b_slivers(dst, b, tb, pc, jc, 0, dst.slivers());
}

}  // namespace panelforge::kernels

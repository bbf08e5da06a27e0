#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace panelforge {

/// Cache-blocking parameters for the packed GEMM plus the algorithmic block
/// size of the factorizations.
///
/// `mc`, `nc`, `kc` are the cache-block extents of the packed A_c / B_c
/// buffers, `mr` x `nr` the register tile of the micro-kernel, `b` the
/// panel width used by the blocked factorizations.
struct CacheConfig {
  std::size_t mc = 72;
  std::size_t nc = 4032;
  std::size_t kc = 256;
  std::size_t mr = 8;
  std::size_t nr = 6;
  std::size_t b = 192;

  /// Tuned values for a Haswell-class core (benchmark default).
  static CacheConfig haswell() { return CacheConfig{}; }

  /// Same blocking with a narrower B_c so unit tests stay small.
  static CacheConfig desk() {
    CacheConfig c;
    c.nc = 1024;
    return c;
  }

  /// Throws std::invalid_argument unless every extent is positive,
  /// mr <= mc and nr <= nc.
  void validate() const;

  CacheConfig with_block(std::size_t block) const {
    CacheConfig c = *this;
    c.b = block;
    return c;
  }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

/// Parses "mc,nc,kc,mr,nr" (block size left at its current value).
CacheConfig parse_cache_spec(std::string_view text, CacheConfig base = {});

std::string to_string(const CacheConfig& cfg);

}  // namespace panelforge

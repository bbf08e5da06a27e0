#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panelforge/config.hpp"
#include "panelforge/factor.hpp"
#include "panelforge/runtime.hpp"

namespace panelforge::bench {

enum class BenchKind { lu, qr, gemm };

/// Strategy column of the CSV. The GEMM study compares one library call
/// (MTB-GEMM) with a b x b tiled task decomposition (RTM-GEMM).
enum class BenchStrategy { mtb, rtm, la, la_mb, mtb_gemm, rtm_gemm };

std::string_view to_string(BenchKind kind);
std::string_view to_string(BenchStrategy strategy);
std::optional<BenchKind> parse_bench_kind(std::string_view text);
std::optional<BenchStrategy> parse_bench_strategy(std::string_view text);

struct BenchRecord {
  BenchKind kind = BenchKind::lu;
  BenchStrategy strategy = BenchStrategy::mtb;
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t threads = 0;
  double seconds = 0.0;  // best of the timed repetitions
  double gflops = 0.0;   // flops(kind, n) / seconds / 1e9
  std::optional<double> residual;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct SweepSpec {
  std::size_t n_min = 256;
  std::size_t n_max = 4096;
  std::size_t n_step = 256;
  std::size_t reps = 3;
  std::uint64_t seed = 42;
  std::vector<BenchKind> kinds{BenchKind::lu};
  /// Factorization strategies; for the GEMM kind, mtb maps to MTB-GEMM and
  /// rtm to RTM-GEMM while the look-ahead strategies are skipped.
  std::vector<factor::Strategy> strategies{factor::Strategy::mtb, factor::Strategy::rtm, factor::Strategy::la,
                                           factor::Strategy::la_mb};
  bool check = false;

  /// Throws std::invalid_argument when n_min > n_max, n_step == 0 or reps == 0.
  void validate() const;
};

struct SkippedRun {
  BenchKind kind;
  BenchStrategy strategy;
  std::size_t n;
  std::string reason;
};

struct SweepResult {
  std::vector<BenchRecord> records;
  std::vector<SkippedRun> skipped;
};

/// Flop count used for the GFLOPS column: 2n^3 for GEMM, the standard
/// factorization counts otherwise.
std::uint64_t flops(BenchKind kind, std::uint64_t n);

/// Problem instance for (seed, n): uniform entries in [0, 1).
Matrix problem_matrix(std::uint64_t seed, std::size_t n, std::uint64_t salt = 0);

/// Runs every (kind, strategy, n) combination: one warm-up, then `reps`
/// timed runs keeping the minimum. Timing covers the library call only.
SweepResult run_sweep(const SweepSpec& spec, const CacheConfig& cfg, Pool& pool,
                      const std::function<void(const BenchRecord&)>& on_record = {});

/// b x b tiled C += A B with one task per block product, dependencies
/// serializing the products that accumulate into the same C block.
void tiled_task_gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, const CacheConfig& cfg, Pool& pool);

inline constexpr std::string_view csv_header = "kind,strategy,n,b,threads,seconds,gflops,residual";

/// Header plus one row per record; numbers are written in the shortest
/// form that parses back to the same double, independent of the locale.
void emit_csv(const std::vector<BenchRecord>& records, std::ostream& sink);

/// Inverse of emit_csv. Throws std::runtime_error on malformed input.
std::vector<BenchRecord> parse_csv(std::istream& source);

}  // namespace panelforge::bench

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panelforge/config.hpp"
#include "panelforge/kernels.hpp"
#include "panelforge/matrix.hpp"
#include "panelforge/runtime.hpp"

namespace panelforge::factor {

enum class Kind { lu, qr };

/// Scheduling strategy of a blocked factorization.
///   mtb   - fork-join: sequential panel, trailing update by the whole team.
///   rtm   - panel and per-column-panel updates as dependency-tracked tasks.
///   la    - static look-ahead (depth 1) with two sections per iteration.
///   la_mb - look-ahead where the panel worker joins the trailing update.
enum class Strategy { mtb, rtm, la, la_mb };

std::string_view to_string(Kind kind);
std::string_view to_string(Strategy strategy);
std::optional<Kind> parse_kind(std::string_view text);
std::optional<Strategy> parse_strategy(std::string_view text);

/// Result of a factorization. The factors overwrite the input matrix:
///  - LU: unit lower L strictly below the diagonal, U on and above it;
///    `pivots` holds 1-based LAPACK row interchanges (length min(m, n));
///    `info` is the 1-based column of the first exactly-zero pivot, 0 if none.
///  - QR: R on and above the diagonal, Householder vectors (unit head
///    implied) below it; `tau` holds the scalars (length min(m, n)).
struct FactorOutput {
  Kind kind = Kind::lu;
  Strategy strategy = Strategy::mtb;
  std::vector<std::int64_t> pivots;
  std::vector<double> tau;
  std::int64_t info = 0;
};

// ---------------------------------------------------------------------------
// instrumentation

enum class TaskKind {
  panel_factor,    // PF(k)
  trailing_panel,  // TU(k, j), one column panel (task-graph strategy)
  trailing,        // TU(k), whole trailing matrix (fork-join strategy)
  update_left,     // TU_k^L, leftmost panel of the trailing matrix
  update_right,    // TU_k^R, remainder of the trailing matrix
};

struct TaskEvent {
  TaskKind kind;
  std::size_t k = 0;
  std::size_t j = 0;
  std::chrono::steady_clock::time_point start;
  std::chrono::steady_clock::time_point finish;
  std::size_t worker = 0;
};

/// Thread-safe record of executed tasks.
class EventLog {
 public:
  void record(const TaskEvent& e);
  std::vector<TaskEvent> events() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<TaskEvent> events_;
};

struct DriverOptions {
  EventLog* log = nullptr;
};

// ---------------------------------------------------------------------------
// panel kernels

struct PanelPivots {
  std::vector<std::int64_t> pivots;  // 1-based, offset by row_base
  std::int64_t info = 0;             // 1-based column of the first zero pivot within the panel
};

/// Unblocked right-looking LU with partial pivoting of an m_p x b panel
/// (getf2). Ties in the pivot search go to the smallest row index. Row
/// interchanges are applied across the full panel width.
PanelPivots lu_unb(MatrixView panel, std::size_t row_base = 0);

/// Unblocked Householder QR of an m_p x b panel (geqr2), m_p >= b. Returns
/// the reflector scalars; a zero column yields tau = 0.
std::vector<double> qr_unb(MatrixView panel);

/// Householder reflector for x (larfg): on return x(0) holds beta =
/// -sign(x0) * ||x||, x(1..) holds v(1..) with v(0) = 1 implied.
double householder(std::span<double> x);

/// Upper triangular T with I - V T V^T = H_1 H_2 ... H_b for the reflectors
/// stored below the diagonal of `panel` (unit diagonal implied).
Matrix larft_forward_columnwise(ConstMatrixView panel, std::span<const double> tau);

/// Compact WY form of a panel's reflectors: explicit V (unit diagonal,
/// zeros above) and T.
struct BlockReflector {
  Matrix v;
  Matrix t;
};

BlockReflector make_block_reflector(ConstMatrixView panel, std::span<const double> tau);

/// C := (I - V T V^T)^T C = C - V (T^T (V^T C)), built from gemm and trmm so
/// the given team carries the work.
void apply_block_reflector(const BlockReflector& h, MatrixView c, const CacheConfig& cfg, Pool& pool,
                           const MalleableTeam& team);

// ---------------------------------------------------------------------------
// drivers

/// Fork-join blocked factorization: the panel is factorized by one worker,
/// the trailing update by the full pool. Requires rows >= cols.
FactorOutput dmf_mtb(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, const DriverOptions& opts = {});

/// Task-graph factorization: PF(k) and TU(k, j) tasks keyed by their panel
/// indices, run by a ready-queue executor on the pool with one worker per
/// task.
FactorOutput dmf_rtm(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, const DriverOptions& opts = {});

/// Static look-ahead: each iteration runs PU(k+1) = TU_k^L + PF(k+1) on one
/// worker next to TU_k^R on the rest of the pool. With `malleable`, the
/// panel worker joins the trailing update once PF(k+1) is done.
FactorOutput dmf_la(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, bool malleable,
                    const DriverOptions& opts = {});

FactorOutput factorize(MatrixView a, Kind kind, Strategy strategy, const CacheConfig& cfg, Pool& pool,
                       const DriverOptions& opts = {});

/// Standard flop count, rounded to the nearest integer: 2n^3/3 for LU,
/// 4n^3/3 for QR.
std::uint64_t flops(Kind kind, std::uint64_t n);

}  // namespace panelforge::factor

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <new>
#include <stdexcept>

#include "panelforge/bench.hpp"
#include "panelforge/oracle.hpp"
#include "panelforge/partition.hpp"
#include "panelforge/random.hpp"
#include "panelforge/task_graph.hpp"

namespace panelforge::bench {

namespace {

using Clock = std::chrono::steady_clock;

BenchStrategy bench_strategy(BenchKind kind, factor::Strategy s) {
  if (kind == BenchKind::gemm) return s == factor::Strategy::mtb ? BenchStrategy::mtb_gemm : BenchStrategy::rtm_gemm;
  switch (s) {
    case factor::Strategy::mtb:
      return BenchStrategy::mtb;
    case factor::Strategy::rtm:
      return BenchStrategy::rtm;
    case factor::Strategy::la:
      return BenchStrategy::la;
    case factor::Strategy::la_mb:
      return BenchStrategy::la_mb;
  }
  return BenchStrategy::mtb;
}

// Largest componentwise error against the naive product, in units of
// k * u * (|A| |B|)_ij.
double gemm_check(ConstMatrixView c, ConstMatrixView a, ConstMatrixView b) {
  Matrix expect(c.rows(), c.cols());
  oracle::naive_gemm(expect.view(), a, b);
  const std::size_t k = a.cols();
  double worst = 0.0;
  for (std::size_t j = 0; j < c.cols(); ++j) {
    for (std::size_t i = 0; i < c.rows(); ++i) {
      double mag = 0.0;
      for (std::size_t p = 0; p < k; ++p) mag += std::fabs(a(i, p)) * std::fabs(b(p, j));
      const double err = std::fabs(c(i, j) - expect(i, j));
      if (err == 0.0) continue;
      const double bound = static_cast<double>(k) * oracle::unit_roundoff * mag;
      worst = std::max(worst, bound > 0.0 ? err / bound : std::numeric_limits<double>::infinity());
    }
  }
  return worst;
}

struct Timing {
  double seconds;
  std::optional<double> residual;
};

Timing time_factorization(factor::Kind kind, factor::Strategy s, const Matrix& original, const CacheConfig& cfg,
                          Pool& pool, std::size_t reps, bool check) {
  double best = std::numeric_limits<double>::infinity();
  Matrix work;
  factor::FactorOutput out;
  for (std::size_t r = 0; r <= reps; ++r) {  // r == 0 is the warm-up
    work = original;
    const auto t0 = Clock::now();
    out = factor::factorize(work.view(), kind, s, cfg, pool);
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r > 0) best = std::min(best, dt);
  }
  Timing t{best, std::nullopt};
  if (check) {
    if (kind == factor::Kind::lu) {
      t.residual = oracle::lu_residual(original.view(), work.view(), out.pivots);
    } else {
      const auto q = oracle::qr_residual(original.view(), work.view(), out.tau);
      t.residual = std::max(q.factor, q.orthogonality);
    }
  }
  return t;
}

Timing time_gemm(BenchStrategy s, std::size_t n, std::uint64_t seed, const CacheConfig& cfg, Pool& pool,
                 std::size_t reps, bool check) {
  const Matrix a = problem_matrix(seed, n, 1);
  const Matrix b = problem_matrix(seed, n, 2);
  Matrix c;
  const MalleableTeam team(pool.size(), pool.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r <= reps; ++r) {
    c = Matrix(n, n);
    const auto t0 = Clock::now();
    if (s == BenchStrategy::mtb_gemm) {
      kernels::gemm(c.view(), a.view(), b.view(), kernels::Transpose::none, kernels::Transpose::none, cfg, pool, team);
    } else {
      tiled_task_gemm(c.view(), a.view(), b.view(), cfg, pool);
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r > 0) best = std::min(best, dt);
  }
  Timing t{best, std::nullopt};
  if (check) t.residual = gemm_check(c.view(), a.view(), b.view());
  return t;
}

}  // namespace

void SweepSpec::validate() const {
  if (n_min == 0 || n_min > n_max) throw std::invalid_argument("sweep: need 1 <= n_min <= n_max");
  if (n_step == 0) throw std::invalid_argument("sweep: n_step must be >= 1");
  if (reps == 0) throw std::invalid_argument("sweep: reps must be >= 1");
}

std::uint64_t flops(BenchKind kind, std::uint64_t n) {
  switch (kind) {
    case BenchKind::lu:
      return factor::flops(factor::Kind::lu, n);
    case BenchKind::qr:
      return factor::flops(factor::Kind::qr, n);
    case BenchKind::gemm:
      return 2 * n * n * n;
  }
  return 0;
}

Matrix problem_matrix(std::uint64_t seed, std::size_t n, std::uint64_t salt) {
  // splitmix-style combination so (seed, n, salt) triples do not collide
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (n + 1) + 0xBF58476D1CE4E5B9ull * salt;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return random_uniform(n, n, z);
}

void tiled_task_gemm(MatrixView c, ConstMatrixView a, ConstMatrixView b, const CacheConfig& cfg, Pool& pool) {
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  const std::size_t k = a.cols();
  if (a.rows() != m || b.rows() != k || b.cols() != n) throw std::invalid_argument("tiled_task_gemm: shape mismatch");
  const std::size_t bs = cfg.b;
  const std::size_t mt = panel_count(m, bs);
  const std::size_t nt = panel_count(n, bs);
  const std::size_t kt = panel_count(k, bs);
  if (mt == 0 || nt == 0 || kt == 0) return;

  factor::TaskGraph graph;
  std::vector<factor::TaskGraph::TaskId> last(mt * nt);
  for (std::size_t p = 0; p < kt; ++p) {
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t i = 0; i < mt; ++i) {
        const auto id = graph.add(
            [&, i, j, p](std::size_t) {
              const PanelRange ri = panel_range(m, bs, i);
              const PanelRange rj = panel_range(n, bs, j);
              const PanelRange rp = panel_range(k, bs, p);
              const MalleableTeam serial(1, 1);
              kernels::gemm(c.sub(ri.begin, rj.begin, ri.width, rj.width), a.sub(ri.begin, rp.begin, ri.width, rp.width),
                            b.sub(rp.begin, rj.begin, rp.width, rj.width), kernels::Transpose::none,
                            kernels::Transpose::none, cfg, pool, serial);
            },
            {0, p, j * mt + i});
        if (p > 0) graph.depend(id, last[j * mt + i]);
        last[j * mt + i] = id;
      }
    }
  }
  graph.run(pool, pool.size());
}

SweepResult run_sweep(const SweepSpec& spec, const CacheConfig& cfg, Pool& pool,
                      const std::function<void(const BenchRecord&)>& on_record) {
  spec.validate();
  cfg.validate();
  SweepResult result;
  for (const BenchKind kind : spec.kinds) {
    std::vector<BenchStrategy> strategies;
    for (const factor::Strategy s : spec.strategies) {
      if (kind == BenchKind::gemm && (s == factor::Strategy::la || s == factor::Strategy::la_mb)) continue;
      const BenchStrategy bs = bench_strategy(kind, s);
      if (std::find(strategies.begin(), strategies.end(), bs) == strategies.end()) strategies.push_back(bs);
    }
    for (std::size_t n = spec.n_min; n <= spec.n_max; n += spec.n_step) {
      for (const BenchStrategy s : strategies) {
        try {
          Timing t;
          if (kind == BenchKind::gemm) {
            t = time_gemm(s, n, spec.seed, cfg, pool, spec.reps, spec.check);
          } else {
            const factor::Kind fk = kind == BenchKind::lu ? factor::Kind::lu : factor::Kind::qr;
            const Matrix original = problem_matrix(spec.seed, n);
            factor::Strategy fs = factor::Strategy::mtb;
            if (s == BenchStrategy::rtm) fs = factor::Strategy::rtm;
            if (s == BenchStrategy::la) fs = factor::Strategy::la;
            if (s == BenchStrategy::la_mb) fs = factor::Strategy::la_mb;
            t = time_factorization(fk, fs, original, cfg, pool, spec.reps, spec.check);
          }
          BenchRecord rec;
          rec.kind = kind;
          rec.strategy = s;
          rec.n = n;
          rec.b = cfg.b;
          rec.threads = pool.size();
          rec.seconds = t.seconds;
          rec.gflops = static_cast<double>(flops(kind, n)) / t.seconds / 1e9;
          rec.residual = t.residual;
          result.records.push_back(rec);
          if (on_record) on_record(rec);
        } catch (const std::bad_alloc&) {
          result.skipped.push_back({kind, s, n, "allocation failed"});
        }
      }
    }
  }
  return result;
}

}  // namespace panelforge::bench

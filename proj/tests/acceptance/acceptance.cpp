// Acceptance suite: prints one PASS/FAIL line per criterion. Criteria 9 and
// 10 are performance trends that depend on the host, so a miss there is
// reported but does not change the exit status.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "panelforge/bench.hpp"
#include "panelforge/factor.hpp"
#include "panelforge/kernels.hpp"
#include "panelforge/oracle.hpp"
#include "panelforge/random.hpp"

using namespace panelforge;
using kernels::Transpose;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double u = oracle::unit_roundoff;
constexpr factor::Strategy kStrategies[] = {factor::Strategy::mtb, factor::Strategy::rtm, factor::Strategy::la,
                                            factor::Strategy::la_mb};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Matrix transposed(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
  return t;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

std::size_t os_thread_count() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("Threads:", 0) == 0) return std::stoul(line.substr(8));
  }
  return 0;
}

// ---------------------------------------------------------------------------

Outcome gemm_accuracy() {
  Pool pool(4);
  const MalleableTeam team(4, 4);
  const CacheConfig cfg = CacheConfig::desk();
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> dim(1, 137);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = dim(gen), n = dim(gen), k = dim(gen);
    const Transpose ta = (rep & 1) ? Transpose::transpose : Transpose::none;
    const Transpose tb = (rep & 2) ? Transpose::transpose : Transpose::none;
    const Matrix a_op = random_uniform(m, k, gen(), -1.0, 1.0);
    const Matrix b_op = random_uniform(k, n, gen(), -1.0, 1.0);
    const Matrix a = ta == Transpose::none ? a_op : transposed(a_op);
    const Matrix b = tb == Transpose::none ? b_op : transposed(b_op);
    Matrix c(m, n), ref(m, n);
    kernels::gemm(c.view(), a.view(), b.view(), ta, tb, cfg, pool, team);
    oracle::naive_gemm(ref.view(), a_op.view(), b_op.view());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const double err = std::fabs(c(i, j) - ref(i, j));
        if (err == 0.0) continue;
        double mag = 0.0;
        for (std::size_t p = 0; p < k; ++p) mag += std::fabs(a_op(i, p)) * std::fabs(b_op(p, j));
        worst = std::max(worst, err / (static_cast<double>(k) * u * mag));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 4.0 && secs < 60.0, fmt("max err/(k u |A||B|) = %.3g (limit 4), %.1f s (limit 60)", worst, secs)};
}

Outcome gemm_determinism() {
  Pool pool(4);
  const CacheConfig cfg = CacheConfig::haswell();
  const std::size_t n = 600;
  const Matrix a = random_uniform(n, n, 2, -1.0, 1.0);
  const Matrix b = random_uniform(n, n, 3, -1.0, 1.0);
  std::vector<Matrix> results;
  std::size_t promotions = 0;
  for (std::size_t t : {1u, 2u, 4u}) {
    for (bool inject : {false, true}) {
      MalleableTeam team(t, 4);
      kernels::GemmHooks hooks{[&](std::size_t) {
        team.promote(team.max());
        ++promotions;
      }};
      Matrix c(n, n);
      kernels::gemm(c.view(), a.view(), b.view(), Transpose::none, Transpose::none, cfg, pool, team,
                    inject ? &hooks : nullptr);
      results.push_back(std::move(c));
    }
  }
  std::size_t mismatches = 0;
  for (const Matrix& r : results) mismatches += !bitwise_equal(r, results.front());
  return {mismatches == 0, fmt("%g runs (team 1,2,4 with/without promotion, %g promotions), %g differ", results.size(),
                               promotions, mismatches)};
}

Outcome packing_round_trip() {
  const std::size_t mr = 8, nr = 6;
  const Matrix src = random_uniform(2 * mr + 10, 2 * mr + 10, 4, -1.0, 1.0);
  std::size_t checked = 0, bad = 0;
  for (Transpose t : {Transpose::none, Transpose::transpose}) {
    for (std::size_t mc = 1; mc <= 2 * mr + 1; ++mc) {
      for (std::size_t kc = 1; kc <= 9; ++kc) {
        kernels::PackedPanelA pa = kernels::make_packed_a(mc, kc, mr);
        for (std::size_t i = 0; i < pa.buffer.size(); ++i) pa.buffer.data()[i] = std::nan("");
        kernels::pack_a(pa, src.view(), t, 1, 2, mc, kc);
        for (std::size_t p = 0; p < kc; ++p)
          for (std::size_t i = 0; i < pa.slivers() * mr; ++i) {
            const double want = i < mc ? (t == Transpose::none ? src(1 + i, 2 + p) : src(2 + p, 1 + i)) : 0.0;
            bad += std::bit_cast<std::uint64_t>(pa.at(i, p)) != std::bit_cast<std::uint64_t>(want);
            ++checked;
          }
      }
    }
    for (std::size_t nc = 1; nc <= 2 * nr + 1; ++nc) {
      for (std::size_t kc = 1; kc <= 9; ++kc) {
        kernels::PackedPanelB pb = kernels::make_packed_b(kc, nc, nr);
        for (std::size_t i = 0; i < pb.buffer.size(); ++i) pb.buffer.data()[i] = std::nan("");
        kernels::pack_b(pb, src.view(), t, 3, 1, kc, nc);
        for (std::size_t p = 0; p < kc; ++p)
          for (std::size_t j = 0; j < pb.slivers() * nr; ++j) {
            const double want = j < nc ? (t == Transpose::none ? src(3 + p, 1 + j) : src(1 + j, 3 + p)) : 0.0;
            bad += std::bit_cast<std::uint64_t>(pb.at(p, j)) != std::bit_cast<std::uint64_t>(want);
            ++checked;
          }
      }
    }
  }
  return {bad == 0, fmt("%g packed entries checked (data and padding), %g wrong", checked, bad)};
}

Outcome lu_backward_error(Pool& pool) {
  double worst = 0.0, worst_l = 0.0;
  for (std::size_t n : {100u, 500u, 1000u}) {
    const Matrix a = random_uniform(n, n, 1000 + n);
    for (std::size_t b : {64u, 192u}) {
      for (factor::Strategy s : kStrategies) {
        Matrix f = a;
        const auto out = factor::factorize(f.view(), factor::Kind::lu, s, CacheConfig::haswell().with_block(b), pool);
        worst = std::max(worst, oracle::lu_residual(a.view(), f.view(), out.pivots));
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = j + 1; i < n; ++i) worst_l = std::max(worst_l, std::fabs(f(i, j)));
      }
    }
  }
  return {worst <= 50.0 && worst_l <= 1.0 + 4 * u,
          fmt("max ||PA-LU||/(n u ||A||) = %.3g (limit 50), max |L| = %.17g", worst, worst_l)};
}

Outcome qr_backward_error(Pool& pool) {
  double worst_f = 0.0, worst_o = 0.0;
  for (std::size_t n : {100u, 500u, 1000u}) {
    const Matrix a = random_uniform(n, n, 2000 + n);
    for (std::size_t b : {64u, 192u}) {
      for (factor::Strategy s : kStrategies) {
        Matrix f = a;
        const auto out = factor::factorize(f.view(), factor::Kind::qr, s, CacheConfig::haswell().with_block(b), pool);
        const auto r = oracle::qr_residual(a.view(), f.view(), out.tau);
        worst_f = std::max(worst_f, r.factor);
        worst_o = std::max(worst_o, r.orthogonality);
      }
    }
  }
  return {worst_f <= 50.0 && worst_o <= 50.0,
          fmt("max ||A-QR||/(n u ||A||) = %.3g, max ||Q^T Q - I||/(n u) = %.3g (limit 50)", worst_f, worst_o)};
}

Outcome strategy_equivalence() {
  const CacheConfig cfg = CacheConfig::haswell().with_block(192);
  std::size_t runs = 0, mismatches = 0;
  for (std::size_t n : {192u, 384u, 960u, 977u}) {
    const Matrix a = random_uniform(n, n, 3000 + n, -1.0, 1.0);
    for (factor::Kind kind : {factor::Kind::lu, factor::Kind::qr}) {
      Matrix ref_f;
      factor::FactorOutput ref_out;
      bool have_ref = false;
      for (std::size_t t : {1u, 2u, 4u}) {
        Pool pool(t);
        for (factor::Strategy s : kStrategies) {
          Matrix f = a;
          const auto out = factor::factorize(f.view(), kind, s, cfg, pool);
          ++runs;
          if (!have_ref) {
            ref_f = std::move(f);
            ref_out = out;
            have_ref = true;
            continue;
          }
          const bool same = bitwise_equal(f, ref_f) && out.pivots == ref_out.pivots && same_bits(out.tau, ref_out.tau);
          mismatches += !same;
        }
      }
    }
  }
  return {mismatches == 0, fmt("%g factorizations compared against MTB t=1, %g differ", runs, mismatches)};
}

Outcome rtm_dependency_audit() {
  Pool pool(4);
  const CacheConfig cfg = CacheConfig::haswell().with_block(192);
  const std::size_t n = 960, panels = 5;
  std::size_t violations = 0, events = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const factor::Kind kind = (seed % 2 == 0) ? factor::Kind::lu : factor::Kind::qr;
    Matrix f = random_uniform(n, n, 4000 + seed, -1.0, 1.0);
    factor::EventLog log;
    factor::dmf_rtm(f.view(), kind, cfg, pool, {&log});
    std::map<std::size_t, factor::TaskEvent> pf;
    std::map<std::pair<std::size_t, std::size_t>, factor::TaskEvent> tu;
    for (const auto& e : log.events()) {
      ++events;
      if (e.kind == factor::TaskKind::panel_factor) pf[e.k] = e;
      if (e.kind == factor::TaskKind::trailing_panel) tu[{e.k, e.j}] = e;
    }
    if (pf.size() != panels || tu.size() != panels * (panels - 1) / 2) {
      ++violations;
      continue;
    }
    for (std::size_t k = 0; k < panels; ++k) {
      if (k > 0 && pf[k].start < tu[{k - 1, k}].finish) ++violations;
      for (std::size_t j = k + 1; j < panels; ++j) {
        const auto& e = tu[{k, j}];
        if (e.start < pf[k].finish) ++violations;
        if (k > 0 && e.start < tu[{k - 1, j}].finish) ++violations;
      }
    }
  }
  return {violations == 0, fmt("20 runs, %g task events, %g edge violations", events, violations)};
}

Outcome oversubscription() {
  const std::size_t t = 4;
  const std::size_t threads_before = os_thread_count();
  Pool pool(t);
  const std::size_t threads_with_pool = os_thread_count();
  pool.reset_high_water();
  std::size_t os_max = threads_with_pool;
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 200 + 61 * rep;
    Matrix a = random_uniform(n, n, 5000 + rep, -1.0, 1.0);
    const CacheConfig cfg = CacheConfig::desk().with_block(32 + 16 * (rep % 4));
    factor::dmf_la(a.view(), rep % 2 ? factor::Kind::qr : factor::Kind::lu, cfg, pool, true);
    os_max = std::max(os_max, os_thread_count());
  }
  const std::size_t high = pool.busy_high_water();
  const bool ok = high <= t && os_max == threads_with_pool && threads_with_pool == threads_before + t;
  return {ok, fmt("busy high-water %g of %g workers; OS threads stayed at %g", high, t, os_max)};
}

Outcome look_ahead_overlap(std::string& extra) {
  const std::size_t t = std::max<std::size_t>(4, std::thread::hardware_concurrency());
  Pool pool(t);
  const std::size_t n = 4096;
  const CacheConfig cfg = CacheConfig::haswell().with_block(192);
  const Matrix a = random_uniform(n, n, 6000);

  Matrix f = a;
  factor::EventLog log;
  auto t0 = Clock::now();
  factor::dmf_la(f.view(), factor::Kind::lu, cfg, pool, false, {&log});
  const double la_secs = seconds_since(t0);

  f = a;
  t0 = Clock::now();
  factor::dmf_mtb(f.view(), factor::Kind::lu, cfg, pool);
  const double mtb_secs = seconds_since(t0);

  std::map<std::size_t, factor::TaskEvent> pf, right;
  for (const auto& e : log.events()) {
    if (e.kind == factor::TaskKind::panel_factor) pf[e.k] = e;
    if (e.kind == factor::TaskKind::update_right) right[e.k] = e;
  }
  std::size_t overlapping = 0;
  for (const auto& [k, r] : right) {
    const auto& p = pf[k + 1];
    overlapping += p.start < r.finish && r.start < p.finish;
  }
  const double fraction = right.empty() ? 0.0 : static_cast<double>(overlapping) / right.size();
  extra = fmt("t=%g, hardware threads=%g", t, std::thread::hardware_concurrency());
  return {fraction > 0.5 && la_secs <= mtb_secs,
          fmt("PF(k+1) overlaps TU_k^R in %.0f%% of iterations; LA %.2f s vs MTB %.2f s", 100 * fraction, la_secs,
              mtb_secs)};
}

Outcome blocked_vs_naive() {
  const CacheConfig cfg = CacheConfig::haswell();
  std::string detail;
  bool ok = true;
  {
    Pool pool(1);
    const std::size_t n = 1024;
    const Matrix a = random_uniform(n, n, 7);
    const Matrix b = random_uniform(n, n, 8);
    Matrix c(n, n), ref(n, n);
    auto t0 = Clock::now();
    kernels::gemm(c.view(), a.view(), b.view(), Transpose::none, Transpose::none, cfg, pool, MalleableTeam(1, 1));
    const double blocked = seconds_since(t0);
    t0 = Clock::now();
    oracle::naive_gemm(ref.view(), a.view(), b.view());
    const double naive = seconds_since(t0);
    ok = ok && naive >= 3.0 * blocked;
    detail += fmt("n=1024 speedup over naive %.1fx (want >= 3); ", naive / blocked);
  }
  {
    const std::size_t n = 2048;
    const Matrix a = random_uniform(n, n, 9);
    const Matrix b = random_uniform(n, n, 10);
    double secs[2] = {0, 0};
    int slot = 0;
    for (std::size_t t : {1u, 4u}) {
      Pool pool(t);
      Matrix c(n, n);
      const auto t0 = Clock::now();
      kernels::gemm(c.view(), a.view(), b.view(), Transpose::none, Transpose::none, cfg, pool, MalleableTeam(t, t));
      secs[slot++] = seconds_since(t0);
    }
    const double efficiency = secs[0] / (4.0 * secs[1]);
    ok = ok && efficiency >= 0.5;
    detail += fmt("n=2048 parallel efficiency at t=4 %.0f%% (want >= 50%%), %g hardware threads", 100 * efficiency,
                  std::thread::hardware_concurrency());
  }
  return {ok, detail};
}

Outcome flop_formulas() {
  const bool ok = factor::flops(factor::Kind::lu, 3) == 18 && factor::flops(factor::Kind::qr, 3) == 36 &&
                  factor::flops(factor::Kind::lu, 1000) == 666666667ull &&
                  factor::flops(factor::Kind::qr, 1000) == 1333333333ull;
  return {ok, fmt("LU(3)=%g QR(3)=%g LU(1000)=%g", factor::flops(factor::Kind::lu, 3),
                  factor::flops(factor::Kind::qr, 3), factor::flops(factor::Kind::lu, 1000))};
}

Outcome csv_round_trip(Pool& pool) {
  bench::SweepSpec spec;
  spec.n_min = 100;
  spec.n_max = 500;
  spec.n_step = 400;
  spec.reps = 1;
  spec.check = true;
  spec.kinds = {bench::BenchKind::lu, bench::BenchKind::qr};
  const auto result = bench::run_sweep(spec, CacheConfig::haswell(), pool);
  std::stringstream ss;
  bench::emit_csv(result.records, ss);
  const auto parsed = bench::parse_csv(ss);
  double worst = 0.0;
  bool all_checked = true;
  for (const auto& r : parsed) {
    all_checked = all_checked && r.residual.has_value();
    if (r.residual) worst = std::max(worst, *r.residual);
  }
  const bool ok = parsed == result.records && result.records.size() == 16 && all_checked && worst <= 50.0;
  std::string detail = fmt("%g records, max residual %.3g (limit 50)", result.records.size(), worst);
  detail += parsed == result.records ? ", parsed back identical" : ", parsed records differ";
  return {ok, detail};
}

}  // namespace

int main() {
  int hard_failures = 0;
  auto report = [&](int id, const char* name, bool soft, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (soft ? "MISS" : "FAIL");
    std::printf("[%s] %2d %-30s %s%s (%.1f s)\n", tag, id, name, soft ? "(soft) " : "", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass && !soft) ++hard_failures;
  };

  Pool pool(4);
  report(1, "gemm accuracy", false, gemm_accuracy);
  report(2, "gemm determinism", false, gemm_determinism);
  report(3, "packing round-trip", false, packing_round_trip);
  report(4, "LU backward error", false, [&] { return lu_backward_error(pool); });
  report(5, "QR backward error", false, [&] { return qr_backward_error(pool); });
  report(6, "strategy bitwise equivalence", false, strategy_equivalence);
  report(7, "RTM dependency audit", false, rtm_dependency_audit);
  report(8, "oversubscription-freedom", false, oversubscription);
  std::string overlap_note;
  report(9, "look-ahead overlap", true, [&] {
    Outcome o = look_ahead_overlap(overlap_note);
    o.detail += " [" + overlap_note + "]";
    return o;
  });
  report(10, "blocked vs naive speed", true, blocked_vs_naive);
  report(11, "flop formulas", false, flop_formulas);
  report(12, "bench CSV round-trip", false, [&] { return csv_round_trip(pool); });

  std::printf("%d hard criteria failed\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}

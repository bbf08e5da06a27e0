#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "panelforge/bench.hpp"

using namespace panelforge;

int main(int argc, char** argv) {
  CLI::App app{"Blocked LU / QR / GEMM benchmark sweep; writes one CSV row per run"};

  std::string kind = "lu";
  std::string strategy = "all";
  bench::SweepSpec spec;
  std::size_t block = 192;
  std::size_t threads = default_thread_count();
  std::string csv = "stdout";
  std::string cache = "72,4032,256,8,6";

  app.add_option("--kind", kind, "lu | qr | gemm")->check(CLI::IsMember({"lu", "qr", "gemm"}, CLI::ignore_case));
  app.add_option("--strategy", strategy, "mtb | rtm | la | la-mb | all")
      ->check(CLI::IsMember({"mtb", "rtm", "la", "la-mb", "la_mb", "all"}, CLI::ignore_case));
  app.add_option("--n-min", spec.n_min, "smallest matrix order")->capture_default_str();
  app.add_option("--n-max", spec.n_max, "largest matrix order")->capture_default_str();
  app.add_option("--n-step", spec.n_step, "step between orders")->capture_default_str();
  app.add_option("--b", block, "algorithmic block size")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "pool size (default: PANELFORGE_THREADS or hardware)")
      ->check(CLI::PositiveNumber);
  app.add_option("--reps", spec.reps, "timed repetitions after one warm-up")->capture_default_str();
  app.add_option("--seed", spec.seed, "problem generator seed")->capture_default_str();
  app.add_flag("--check", spec.check, "record oracle residuals");
  app.add_option("--csv", csv, "output path or 'stdout'")->capture_default_str();
  app.add_option("--cache", cache, "mc,nc,kc,mr,nr")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    spec.kinds = {*bench::parse_bench_kind(kind)};
    if (strategy == "all" || strategy == "ALL") {
      spec.strategies = {factor::Strategy::mtb, factor::Strategy::rtm, factor::Strategy::la, factor::Strategy::la_mb};
    } else {
      spec.strategies = {*factor::parse_strategy(strategy)};
    }
    spec.validate();
    const CacheConfig cfg = parse_cache_spec(cache, CacheConfig{}.with_block(block));

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (csv != "stdout") {
      file.open(csv);
      if (!file) {
        std::cerr << "cannot open " << csv << " for writing\n";
        return 1;
      }
      out = &file;
    }

    Pool pool(threads);
    std::cerr << "threads=" << threads << " " << to_string(cfg) << "\n";
    const bench::SweepResult result = bench::run_sweep(spec, cfg, pool, [](const bench::BenchRecord& r) {
      std::cerr << bench::to_string(r.kind) << " " << bench::to_string(r.strategy) << " n=" << r.n << " "
                << r.gflops << " GFLOPS";
      if (r.residual) std::cerr << " residual=" << *r.residual;
      std::cerr << "\n";
    });
    bench::emit_csv(result.records, *out);
    for (const bench::SkippedRun& s : result.skipped) {
      std::cerr << "skipped " << bench::to_string(s.kind) << " " << bench::to_string(s.strategy) << " n=" << s.n
                << ": " << s.reason << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

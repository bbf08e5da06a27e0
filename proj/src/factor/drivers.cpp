#include <algorithm>
#include <atomic>
#include <cctype>
#include <memory>
#include <stdexcept>

#include "panelforge/factor.hpp"
#include "panelforge/partition.hpp"
#include "panelforge/task_graph.hpp"

namespace panelforge::factor {

namespace {

using Clock = std::chrono::steady_clock;

// Instrumented scope: records one TaskEvent when a log is attached.
class Timed {
 public:
  Timed(EventLog* log, const Pool& pool, TaskKind kind, std::size_t k, std::size_t j)
      : log_(log), event_{kind, k, j, {}, {}, pool.worker_index()} {
    if (log_ != nullptr) event_.start = Clock::now();
  }
  ~Timed() {
    if (log_ == nullptr) return;
    event_.finish = Clock::now();
    log_->record(event_);
  }
  Timed(const Timed&) = delete;
  Timed& operator=(const Timed&) = delete;

 private:
  EventLog* log_;
  TaskEvent event_;
};

// The per-kind operations plugged into the generic blocked skeleton:
// PF(k) on the panel, the trailing update of step k restricted to a column
// range, and whatever has to happen once all panels are done.
class LuSteps {
 public:
  LuSteps(MatrixView a, const CacheConfig& cfg) : a_(a), cfg_(cfg), n_(a.cols()) {
    pivots_.resize(std::min(a.rows(), a.cols()));
  }

  std::size_t panels() const { return panel_count(n_, cfg_.b); }
  PanelRange panel(std::size_t k) const { return panel_range(n_, cfg_.b, k); }

  void factor_panel(std::size_t k) {
    const PanelRange p = panel(k);
    PanelPivots pp = lu_unb(a_.sub(p.begin, p.begin, a_.rows() - p.begin, p.width), p.begin);
    std::copy(pp.pivots.begin(), pp.pivots.end(), pivots_.begin() + static_cast<std::ptrdiff_t>(p.begin));
    if (pp.info != 0 && info_ == 0) info_ = static_cast<std::int64_t>(p.begin) + pp.info;
  }

  // laswp + trsm + gemm of step k on columns [c0, c1).
  void update(std::size_t k, std::size_t c0, std::size_t c1, Pool& pool, const MalleableTeam& team) {
    if (c1 <= c0) return;
    const PanelRange p = panel(k);
    const std::size_t below = a_.rows() - p.end();
    MatrixView cols = a_.cols_range(c0, c1 - c0);
    kernels::laswp(cols, pivots_, p.begin, p.end(), pool, team);
    const MatrixView a12 = cols.sub(p.begin, 0, p.width, cols.cols());
    kernels::trsm_llnu(a_.sub(p.begin, p.begin, p.width, p.width), a12, cfg_, pool, team);
    if (below > 0) {
      kernels::gemm_sub(cols.sub(p.end(), 0, below, cols.cols()), a_.sub(p.end(), p.begin, below, p.width), a12,
                        kernels::Transpose::none, kernels::Transpose::none, cfg_, pool, team);
    }
  }

  void retire(std::size_t) {}

  // Interchanges of step k reach the columns left of panel k only here, so
  // that no driver ever permutes rows another worker is still reading.
  void finish(Pool& pool, const MalleableTeam& team) {
    for (std::size_t k = 1; k < panels(); ++k) {
      const PanelRange p = panel(k);
      kernels::laswp(a_.cols_range(0, p.begin), pivots_, p.begin, p.end(), pool, team);
    }
  }

  FactorOutput output(Strategy s) {
    FactorOutput out;
    out.kind = Kind::lu;
    out.strategy = s;
    out.pivots = std::move(pivots_);
    out.info = info_;
    return out;
  }

 private:
  MatrixView a_;
  CacheConfig cfg_;
  std::size_t n_;
  std::vector<std::int64_t> pivots_;
  std::int64_t info_ = 0;
};

class QrSteps {
 public:
  QrSteps(MatrixView a, const CacheConfig& cfg) : a_(a), cfg_(cfg), n_(a.cols()) {
    tau_.resize(std::min(a.rows(), a.cols()));
    reflectors_.resize(panels());
  }

  std::size_t panels() const { return panel_count(n_, cfg_.b); }
  PanelRange panel(std::size_t k) const { return panel_range(n_, cfg_.b, k); }

  // geqr2 on the panel, then its compact WY form for the updates.
  void factor_panel(std::size_t k) {
    const PanelRange p = panel(k);
    const MatrixView pv = a_.sub(p.begin, p.begin, a_.rows() - p.begin, p.width);
    const std::vector<double> t = qr_unb(pv);
    std::copy(t.begin(), t.end(), tau_.begin() + static_cast<std::ptrdiff_t>(p.begin));
    if (p.end() < n_) reflectors_[k] = std::make_unique<BlockReflector>(make_block_reflector(pv, t));
  }

  void update(std::size_t k, std::size_t c0, std::size_t c1, Pool& pool, const MalleableTeam& team) {
    if (c1 <= c0) return;
    const PanelRange p = panel(k);
    apply_block_reflector(*reflectors_[k], a_.sub(p.begin, c0, a_.rows() - p.begin, c1 - c0), cfg_, pool, team);
  }

  void retire(std::size_t k) { reflectors_[k].reset(); }

  void finish(Pool&, const MalleableTeam&) {}

  FactorOutput output(Strategy s) {
    FactorOutput out;
    out.kind = Kind::qr;
    out.strategy = s;
    out.tau = std::move(tau_);
    return out;
  }

 private:
  MatrixView a_;
  CacheConfig cfg_;
  std::size_t n_;
  std::vector<double> tau_;
  std::vector<std::unique_ptr<BlockReflector>> reflectors_;
};

void check_operand(ConstMatrixView a, const CacheConfig& cfg) {
  cfg.validate();
  if (a.rows() < a.cols()) throw std::invalid_argument("factorization requires rows >= cols");
}

template <typename Steps>
FactorOutput run_mtb(Steps& steps, MatrixView a, const CacheConfig& cfg, Pool& pool, const DriverOptions& opts) {
  pool.run([&] {
    const MalleableTeam team(pool.size(), pool.size());
    Quadrants q = part_2x2(a, 0, 0);
    std::size_t k = 0;
    while (has_remaining(q)) {
      const Partition3x3 p = repart_3x3(q, cfg.b);
      {
        Timed t(opts.log, pool, TaskKind::panel_factor, k, k);
        steps.factor_panel(k);
      }
      {
        const std::size_t c0 = p.a12.col_off() - a.col_off();
        Timed t(opts.log, pool, TaskKind::trailing, k, k + 1);
        steps.update(k, c0, c0 + p.a12.cols(), pool, team);
      }
      steps.retire(k);
      q = cont_with_3x3(p);
      ++k;
    }
    steps.finish(pool, team);
  });
  return steps.output(Strategy::mtb);
}

template <typename Steps>
FactorOutput run_rtm(Steps& steps, Pool& pool, const DriverOptions& opts) {
  const std::size_t panels = steps.panels();
  TaskGraph graph;
  // pf[k] and tu[k][j - k - 1] hold the task ids of PF(k) and TU(k, j).
  std::vector<TaskGraph::TaskId> pf(panels);
  std::vector<std::vector<TaskGraph::TaskId>> tu(panels);
  auto remaining = std::make_unique<std::atomic<std::size_t>[]>(panels);

  for (std::size_t k = 0; k < panels; ++k) {
    pf[k] = graph.add(
        [&, k](std::size_t) {
          Timed t(opts.log, pool, TaskKind::panel_factor, k, k);
          steps.factor_panel(k);
        },
        {0, k, k});
    if (k > 0) graph.depend(pf[k], tu[k - 1][0]);  // PF(k) <- TU(k-1, k)
    remaining[k].store(panels - k - 1);
    for (std::size_t j = k + 1; j < panels; ++j) {
      const auto id = graph.add(
          [&, k, j](std::size_t) {
            const MalleableTeam serial(1, 1);
            const PanelRange cols = steps.panel(j);
            {
              Timed t(opts.log, pool, TaskKind::trailing_panel, k, j);
              steps.update(k, cols.begin, cols.end(), pool, serial);
            }
            if (remaining[k].fetch_sub(1) == 1) steps.retire(k);
          },
          {1, k, j});
      graph.depend(id, pf[k]);                        // TU(k, j) <- PF(k)
      if (k > 0) graph.depend(id, tu[k - 1][j - k]);  // TU(k, j) <- TU(k-1, j)
      tu[k].push_back(id);
    }
  }
  graph.run(pool, pool.size());
  pool.run([&] {
    const MalleableTeam team(pool.size(), pool.size());
    steps.finish(pool, team);
  });
  return steps.output(Strategy::rtm);
}

template <typename Steps>
FactorOutput run_la(Steps& steps, std::size_t n, Pool& pool, bool malleable, const DriverOptions& opts) {
  pool.run([&] {
    const std::size_t panels = steps.panels();
    const MalleableTeam full(pool.size(), pool.size());
    const MalleableTeam serial(1, 1);
    if (panels == 0) return;
    {
      Timed t(opts.log, pool, TaskKind::panel_factor, 0, 0);
      steps.factor_panel(0);
    }
    for (std::size_t k = 0; k + 1 < panels; ++k) {
      const PanelRange next = steps.panel(k + 1);
      sections_2(
          pool,
          [&](TeamPromoter promoter) {
            // PU(k+1): TU_k^L followed by PF(k+1), sequential on this worker
            {
              Timed t(opts.log, pool, TaskKind::update_left, k, k + 1);
              steps.update(k, next.begin, next.end(), pool, serial);
            }
            {
              Timed t(opts.log, pool, TaskKind::panel_factor, k + 1, k + 1);
              steps.factor_panel(k + 1);
            }
            if (malleable) promoter.promote_to_max();
          },
          [&](MalleableTeam& team) {
            if (next.end() >= n) return;
            Timed t(opts.log, pool, TaskKind::update_right, k, k + 2);
            steps.update(k, next.end(), n, pool, team);
          });
      steps.retire(k);
    }
    steps.finish(pool, full);
  });
  return steps.output(malleable ? Strategy::la_mb : Strategy::la);
}

}  // namespace

FactorOutput dmf_mtb(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, const DriverOptions& opts) {
  check_operand(a, cfg);
  if (kind == Kind::lu) {
    LuSteps steps(a, cfg);
    return run_mtb(steps, a, cfg, pool, opts);
  }
  QrSteps steps(a, cfg);
  return run_mtb(steps, a, cfg, pool, opts);
}

FactorOutput dmf_rtm(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, const DriverOptions& opts) {
  check_operand(a, cfg);
  if (kind == Kind::lu) {
    LuSteps steps(a, cfg);
    return run_rtm(steps, pool, opts);
  }
  QrSteps steps(a, cfg);
  return run_rtm(steps, pool, opts);
}

FactorOutput dmf_la(MatrixView a, Kind kind, const CacheConfig& cfg, Pool& pool, bool malleable,
                    const DriverOptions& opts) {
  check_operand(a, cfg);
  if (kind == Kind::lu) {
    LuSteps steps(a, cfg);
    return run_la(steps, a.cols(), pool, malleable, opts);
  }
  QrSteps steps(a, cfg);
  return run_la(steps, a.cols(), pool, malleable, opts);
}

FactorOutput factorize(MatrixView a, Kind kind, Strategy strategy, const CacheConfig& cfg, Pool& pool,
                       const DriverOptions& opts) {
  switch (strategy) {
    case Strategy::mtb:
      return dmf_mtb(a, kind, cfg, pool, opts);
    case Strategy::rtm:
      return dmf_rtm(a, kind, cfg, pool, opts);
    case Strategy::la:
      return dmf_la(a, kind, cfg, pool, false, opts);
    case Strategy::la_mb:
      return dmf_la(a, kind, cfg, pool, true, opts);
  }
  throw std::invalid_argument("factorize: unknown strategy");
}

std::uint64_t flops(Kind kind, std::uint64_t n) {
  const std::uint64_t cube = n * n * n;
  const std::uint64_t numerator = (kind == Kind::lu ? 2 : 4) * cube;
  return (numerator + 1) / 3;  // nearest integer to numerator / 3
}

// ---------------------------------------------------------------------------

void EventLog::record(const TaskEvent& e) {
  std::lock_guard lock(mu_);
  events_.push_back(e);
}

std::vector<TaskEvent> EventLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

void EventLog::clear() {
  std::lock_guard lock(mu_);
  events_.clear();
}

std::string_view to_string(Kind kind) { return kind == Kind::lu ? "LU" : "QR"; }

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::mtb:
      return "MTB";
    case Strategy::rtm:
      return "RTM";
    case Strategy::la:
      return "LA";
    case Strategy::la_mb:
      return "LA_MB";
  }
  return "?";
}

namespace {
std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}
}  // namespace

std::optional<Kind> parse_kind(std::string_view text) {
  const std::string s = lower(text);
  if (s == "lu") return Kind::lu;
  if (s == "qr") return Kind::qr;
  return std::nullopt;
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  const std::string s = lower(text);
  if (s == "mtb") return Strategy::mtb;
  if (s == "rtm") return Strategy::rtm;
  if (s == "la") return Strategy::la;
  if (s == "la-mb") return Strategy::la_mb;
  return std::nullopt;
}

}  // namespace panelforge::factor

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "panelforge/runtime.hpp"

namespace panelforge {

namespace {

thread_local const Pool* tl_pool = nullptr;
thread_local std::size_t tl_index = 0;

// First exception raised by any participant of one dispatch.
class ErrorSlot {
 public:
  void capture() {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow_if_set() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

template <typename Pred>
bool spin_until(Pred pred, std::chrono::microseconds budget) {
  if (budget.count() <= 0) return pred();
  const auto deadline = std::chrono::steady_clock::now() + budget;
  for (unsigned iter = 0;; ++iter) {
    if (pred()) return true;
    if ((iter & 63u) == 63u && std::chrono::steady_clock::now() >= deadline) return pred();
    std::this_thread::yield();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MalleableTeam

MalleableTeam::MalleableTeam(std::size_t initial, std::size_t max) : size_(1), max_(max) {
  if (max == 0) throw std::invalid_argument("MalleableTeam: max must be >= 1");
  size_.store(std::clamp<std::size_t>(initial, 1, max), std::memory_order_release);
}

MalleableTeam::PromoteResult MalleableTeam::promote(std::size_t new_size) {
  const std::size_t applied = std::clamp<std::size_t>(new_size, 1, max_);
  size_.store(applied, std::memory_order_release);
  return {applied, applied != new_size};
}

MalleableTeam::PromoteResult TeamPromoter::promote(std::size_t new_size) const { return team_->promote(new_size); }

MalleableTeam::PromoteResult TeamPromoter::promote_to_max() const { return team_->promote(team_->max()); }

// ---------------------------------------------------------------------------
// Pool

struct Pool::Worker {
  std::size_t index = 0;
  std::thread thread;
  // Job generation counters; a job is pending while assigned > completed.
  std::atomic<std::uint64_t> assigned{0};
  std::atomic<std::uint64_t> completed{0};
  std::atomic<bool> stop{false};
  // Payload, written by the recruiter before `assigned` is bumped.
  std::optional<FunctionRef<void(std::size_t, std::size_t)>> job;
  std::size_t rank = 0;
  std::size_t ranks = 1;
};

struct Pool::IdleList {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<Worker*> workers;
};

Pool::Pool(std::size_t threads, PoolOptions options) : options_(options), idle_(std::make_unique<IdleList>()) {
  if (threads == 0) throw std::invalid_argument("Pool: thread count must be >= 1");
  workers_.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) {
    auto w = std::make_unique<Worker>();
    w->index = i;
    workers_.push_back(std::move(w));
  }
  // Reverse order so that worker 0 is handed out first.
  for (auto it = workers_.rbegin(); it != workers_.rend(); ++it) idle_->workers.push_back(it->get());
  for (auto& w : workers_) {
    Worker* raw = w.get();
    raw->thread = std::thread([this, raw] { worker_loop(*raw); });
  }
}

Pool::~Pool() {
  for (auto& w : workers_) {
    w->stop.store(true, std::memory_order_release);
    w->assigned.fetch_add(1, std::memory_order_acq_rel);
    w->assigned.notify_all();
  }
  for (auto& w : workers_) w->thread.join();
}

bool Pool::on_worker() const { return tl_pool == this; }

std::size_t Pool::worker_index() const { return on_worker() ? tl_index : size(); }

void Pool::enter_busy() {
  const std::size_t now = busy_.fetch_add(1, std::memory_order_relaxed) + 1;
  std::size_t prev = high_water_.load(std::memory_order_relaxed);
  while (prev < now && !high_water_.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
  }
}

void Pool::leave_busy() { busy_.fetch_sub(1, std::memory_order_relaxed); }

void Pool::worker_loop(Worker& w) {
  tl_pool = this;
  tl_index = w.index;
  std::uint64_t seen = 0;
  for (;;) {
    const auto has_job = [&] { return w.assigned.load(std::memory_order_acquire) != seen; };
    if (!spin_until(has_job, options_.blocktime)) {
      while (!has_job()) w.assigned.wait(seen, std::memory_order_acquire);
    }
    if (w.stop.load(std::memory_order_acquire)) return;
    seen = w.assigned.load(std::memory_order_acquire);

    const auto job = *w.job;
    const std::size_t rank = w.rank;
    const std::size_t ranks = w.ranks;
    enter_busy();
    job(rank, ranks);  // wrappers installed by fork_join/run never throw
    leave_busy();

    release(w);
    w.completed.store(seen, std::memory_order_release);
    w.completed.notify_all();
  }
}

std::vector<Pool::Worker*> Pool::try_recruit(std::size_t count) {
  std::vector<Worker*> out;
  if (count == 0) return out;
  std::lock_guard lock(idle_->mu);
  while (out.size() < count && !idle_->workers.empty()) {
    out.push_back(idle_->workers.back());
    idle_->workers.pop_back();
  }
  return out;
}

Pool::Worker* Pool::acquire_blocking() {
  std::unique_lock lock(idle_->mu);
  idle_->cv.wait(lock, [&] { return !idle_->workers.empty(); });
  Worker* w = idle_->workers.back();
  idle_->workers.pop_back();
  return w;
}

void Pool::release(Worker& w) {
  {
    std::lock_guard lock(idle_->mu);
    idle_->workers.push_back(&w);
  }
  idle_->cv.notify_one();
}

void Pool::assign(Worker& w, FunctionRef<void(std::size_t, std::size_t)> fn, std::size_t rank, std::size_t ranks,
                  std::uint64_t& ticket) {
  w.job.emplace(fn);
  w.rank = rank;
  w.ranks = ranks;
  ticket = w.assigned.fetch_add(1, std::memory_order_acq_rel) + 1;
  w.assigned.notify_all();
}

void Pool::wait_done(Worker& w, std::uint64_t ticket) {
  const auto done = [&] { return w.completed.load(std::memory_order_acquire) >= ticket; };
  // Only pool workers spin; an outside caller parks right away so that it
  // never competes with the workers for a core.
  const auto budget = on_worker() ? options_.blocktime : std::chrono::microseconds{0};
  if (spin_until(done, budget)) return;
  for (;;) {
    const std::uint64_t c = w.completed.load(std::memory_order_acquire);
    if (c >= ticket) return;
    w.completed.wait(c, std::memory_order_acquire);
  }
}

void Pool::run(FunctionRef<void()> fn) {
  if (on_worker()) {
    fn();
    return;
  }
  ErrorSlot error;
  auto wrapped = [&](std::size_t, std::size_t) {
    try {
      fn();
    } catch (...) {
      error.capture();
    }
  };
  Worker* w = acquire_blocking();
  std::uint64_t ticket = 0;
  assign(*w, wrapped, 0, 1, ticket);
  wait_done(*w, ticket);
  error.rethrow_if_set();
}

std::size_t Pool::fork_join(std::size_t extra, FunctionRef<void(std::size_t, std::size_t)> body) {
  if (!on_worker()) throw std::logic_error("Pool::fork_join must be called from a pool worker");
  std::vector<Worker*> helpers = try_recruit(extra);
  if (helpers.size() < extra) short_recruits_.fetch_add(1, std::memory_order_relaxed);
  const std::size_t ranks = helpers.size() + 1;

  ErrorSlot error;
  auto wrapped = [&](std::size_t rank, std::size_t n) {
    try {
      body(rank, n);
    } catch (...) {
      error.capture();
    }
  };
  std::vector<std::uint64_t> tickets(helpers.size());
  for (std::size_t i = 0; i < helpers.size(); ++i) assign(*helpers[i], wrapped, i + 1, ranks, tickets[i]);
  wrapped(0, ranks);
  for (std::size_t i = 0; i < helpers.size(); ++i) wait_done(*helpers[i], tickets[i]);
  error.rethrow_if_set();
  return ranks;
}

// ---------------------------------------------------------------------------
// constructs

void parallel_for(Pool& pool, const MalleableTeam& team, ChunkRange range,
                  FunctionRef<void(std::size_t chunk, std::size_t rank)> body) {
  if (range.stride == 0) throw std::invalid_argument("parallel_for: stride must be >= 1");
  const std::size_t chunks = range.count();
  if (chunks == 0) return;
  pool.run([&] {
    const std::size_t want = std::min(team.size(), chunks);
    if (want <= 1) {
      for (std::size_t c = 0; c < chunks; ++c) body(range.at(c), 0);
      return;
    }
    pool.fork_join(want - 1, [&](std::size_t rank, std::size_t ranks) {
      const ChunkBlock blk = static_block(chunks, rank, ranks);
      for (std::size_t c = blk.first; c < blk.last; ++c) body(range.at(c), rank);
    });
  });
}

void sections_2(Pool& pool, FunctionRef<void(TeamPromoter)> branch_a, FunctionRef<void(MalleableTeam&)> branch_b) {
  pool.run([&] {
    const std::size_t t = pool.size();
    MalleableTeam team(t > 1 ? t - 1 : 1, t);
    const auto sequential = [&] {
      branch_a(TeamPromoter(&team));
      branch_b(team);
    };
    if (t < 2) {
      sequential();
      return;
    }
    pool.fork_join(1, [&](std::size_t rank, std::size_t ranks) {
      if (ranks == 1) {
        sequential();
      } else if (rank == 1) {
        branch_a(TeamPromoter(&team));
      } else {
        branch_b(team);
      }
    });
  });
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("PANELFORGE_THREADS")) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(env, &pos, 10);
      if (pos == std::string(env).size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to the hardware count
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace panelforge

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <type_traits>
#include <utility>
#include <vector>

namespace panelforge {

/// Non-owning reference to a callable. The referenced object must outlive
/// every call made through the reference.
template <typename Signature>
class FunctionRef;

template <typename R, typename... Args>
class FunctionRef<R(Args...)> {
 public:
  template <typename F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, FunctionRef> && std::is_invocable_r_v<R, F&, Args...>)
  FunctionRef(F&& f) noexcept  // NOLINT(google-explicit-constructor)
      : object_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
        call_([](void* obj, Args... args) -> R {
          return (*static_cast<std::remove_reference_t<F>*>(obj))(std::forward<Args>(args)...);
        }) {}

  R operator()(Args... args) const { return call_(object_, std::forward<Args>(args)...); }

 private:
  void* object_;
  R (*call_)(void*, Args...);
};

/// Iteration space begin, begin + stride, ... (< end). Each element is one
/// chunk handed to a parallel_for body.
struct ChunkRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t stride = 1;

  std::size_t count() const { return end <= begin ? 0 : (end - begin + stride - 1) / stride; }
  std::size_t at(std::size_t index) const { return begin + index * stride; }
};

/// Static block of chunk indices owned by `rank` out of `ranks`.
struct ChunkBlock {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
};
inline ChunkBlock static_block(std::size_t chunks, std::size_t rank, std::size_t ranks) {
  return {chunks * rank / ranks, chunks * (rank + 1) / ranks};
}

/// Shared, adjustable team size for parallel_for encounters.
///
/// The size is read once per encounter, so a change made by another worker
/// never affects a dispatch that is already running.
class MalleableTeam {
 public:
  MalleableTeam(std::size_t initial, std::size_t max);

  std::size_t size() const { return size_.load(std::memory_order_acquire); }
  std::size_t max() const { return max_; }

  struct PromoteResult {
    std::size_t applied = 0;
    bool clamped = false;
  };
  /// Sets the size used by the next encounter. Values outside [1, max] are
  /// clamped and reported through the result.
  PromoteResult promote(std::size_t new_size);

 private:
  std::atomic<std::size_t> size_;
  std::size_t max_;
};

/// Restricted handle given to the first branch of sections_2: it may grow
/// the second branch's team but cannot dispatch work on it.
class TeamPromoter {
 public:
  explicit TeamPromoter(MalleableTeam* team) : team_(team) {}
  MalleableTeam::PromoteResult promote(std::size_t new_size) const;
  MalleableTeam::PromoteResult promote_to_max() const;

 private:
  MalleableTeam* team_;
};

struct PoolOptions {
  /// How long an idle worker spins before it parks.
  std::chrono::microseconds blocktime{1000};
};

/// Fixed set of worker threads. All parallel constructs execute on these
/// workers only; a thread outside the pool that enters a construct hands the
/// work to a worker and blocks until it completes. The number of threads
/// executing pool work is therefore never larger than size().
class Pool {
 public:
  explicit Pool(std::size_t threads, PoolOptions options = {});
  ~Pool();
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;

  std::size_t size() const { return workers_.size(); }

  /// Runs `fn` on a pool worker: inline if the caller already is one of this
  /// pool's workers, otherwise on an idle worker while the caller waits.
  void run(FunctionRef<void()> fn);

  /// True when the calling thread is one of this pool's workers.
  bool on_worker() const;

  /// Rank of the calling worker within the pool (0..size-1), or size() when
  /// called from outside.
  std::size_t worker_index() const;

  /// Workers currently executing pool work.
  std::size_t busy() const { return busy_.load(std::memory_order_relaxed); }
  /// Maximum of busy() observed since construction or the last reset.
  std::size_t busy_high_water() const { return high_water_.load(std::memory_order_relaxed); }
  void reset_high_water() { high_water_.store(busy(), std::memory_order_relaxed); }

  /// Number of dispatches that asked for more helpers than were idle.
  std::uint64_t short_recruits() const { return short_recruits_.load(std::memory_order_relaxed); }

  /// Executes body(rank) on the caller (rank 0) and on up to `extra` idle
  /// workers (ranks 1..). Returns the number of participants. The caller
  /// must be a worker of this pool. Rethrows the first exception raised by
  /// any participant after all of them finished.
  std::size_t fork_join(std::size_t extra, FunctionRef<void(std::size_t rank, std::size_t ranks)> body);

 private:
  struct Worker;

  void worker_loop(Worker& w);
  std::vector<Worker*> try_recruit(std::size_t count);
  Worker* acquire_blocking();
  void assign(Worker& w, FunctionRef<void(std::size_t, std::size_t)> fn, std::size_t rank, std::size_t ranks,
              std::uint64_t& ticket);
  void wait_done(Worker& w, std::uint64_t ticket);
  void release(Worker& w);
  void enter_busy();
  void leave_busy();

  PoolOptions options_;
  std::vector<std::unique_ptr<Worker>> workers_;

  struct IdleList;
  std::unique_ptr<IdleList> idle_;

  std::atomic<std::size_t> busy_{0};
  std::atomic<std::size_t> high_water_{0};
  std::atomic<std::uint64_t> short_recruits_{0};
};

/// Loop-parallel construct: every chunk of `range` is executed exactly once,
/// chunks statically blocked over the participants. The team size is read
/// once at entry; the construct ends with a barrier.
void parallel_for(Pool& pool, const MalleableTeam& team, ChunkRange range,
                  FunctionRef<void(std::size_t chunk, std::size_t rank)> body);

/// Two-branch section split. `branch_a` runs on one dedicated worker and
/// receives a promoter for the team of `branch_b`; `branch_b` runs on another
/// worker with a team of size()-1 (max size()). Returns when both finished.
/// A pool of one worker runs the branches one after the other.
void sections_2(Pool& pool, FunctionRef<void(TeamPromoter)> branch_a, FunctionRef<void(MalleableTeam&)> branch_b);

/// Default pool size: PANELFORGE_THREADS when set to a positive decimal,
/// otherwise the hardware concurrency (at least 1).
std::size_t default_thread_count();

}  // namespace panelforge

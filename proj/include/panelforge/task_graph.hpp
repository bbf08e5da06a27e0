#pragma once

#include <cstddef>
#include <functional>
#include <tuple>
#include <vector>

#include "panelforge/runtime.hpp"

namespace panelforge::factor {

/// Static dependency graph executed by a ready-queue scheduler on pool
/// workers. Among ready tasks the one with the smallest priority tuple runs
/// first.
class TaskGraph {
 public:
  using TaskId = std::size_t;
  using Priority = std::tuple<int, std::size_t, std::size_t>;

  TaskId add(std::function<void(std::size_t worker)> fn, Priority priority = {});

  /// `task` may start only after `prerequisite` finished.
  void depend(TaskId task, TaskId prerequisite);

  std::size_t size() const { return tasks_.size(); }

  /// Runs every task exactly once on at most `workers` pool workers. The
  /// first exception thrown by a task stops the schedule and is rethrown.
  void run(Pool& pool, std::size_t workers);

 private:
  struct Task {
    std::function<void(std::size_t)> fn;
    Priority priority;
    std::vector<TaskId> successors;
    std::size_t prerequisites = 0;
  };
  std::vector<Task> tasks_;
};

}  // namespace panelforge::factor

#include "panelforge/task_graph.hpp"

#include <condition_variable>
#include <exception>
#include <mutex>
#include <queue>
#include <stdexcept>

namespace panelforge::factor {

TaskGraph::TaskId TaskGraph::add(std::function<void(std::size_t)> fn, Priority priority) {
  tasks_.push_back(Task{std::move(fn), priority, {}, 0});
  return tasks_.size() - 1;
}

void TaskGraph::depend(TaskId task, TaskId prerequisite) {
  if (task >= tasks_.size() || prerequisite >= tasks_.size() || task == prerequisite) {
    throw std::invalid_argument("TaskGraph::depend: invalid task id");
  }
  tasks_[prerequisite].successors.push_back(task);
  ++tasks_[task].prerequisites;
}

void TaskGraph::run(Pool& pool, std::size_t workers) {
  if (tasks_.empty()) return;
  workers = std::max<std::size_t>(1, std::min(workers, pool.size()));

  const auto later = [this](TaskId a, TaskId b) {
    return tasks_[a].priority > tasks_[b].priority || (tasks_[a].priority == tasks_[b].priority && a > b);
  };
  std::priority_queue<TaskId, std::vector<TaskId>, decltype(later)> ready(later);
  std::vector<std::size_t> pending(tasks_.size());
  for (TaskId id = 0; id < tasks_.size(); ++id) {
    pending[id] = tasks_[id].prerequisites;
    if (pending[id] == 0) ready.push(id);
  }
  if (ready.empty()) throw std::logic_error("TaskGraph::run: no task without prerequisites (cycle)");

  std::mutex mu;
  std::condition_variable cv;
  std::size_t finished = 0;
  std::size_t running = 0;
  bool abort = false;
  std::exception_ptr error;

  const auto worker_loop = [&](std::size_t rank) {
    std::unique_lock lock(mu);
    for (;;) {
      cv.wait(lock, [&] { return abort || finished == tasks_.size() || !ready.empty() || running == 0; });
      if (abort || finished == tasks_.size()) return;
      if (ready.empty()) {
        // nothing ready and nothing running: the remaining tasks form a cycle
        abort = true;
        error = std::make_exception_ptr(std::logic_error("TaskGraph::run: dependency cycle"));
        cv.notify_all();
        return;
      }
      const TaskId id = ready.top();
      ready.pop();
      ++running;
      lock.unlock();
      try {
        tasks_[id].fn(rank);
      } catch (...) {
        lock.lock();
        --running;
        if (!error) error = std::current_exception();
        abort = true;
        cv.notify_all();
        return;
      }
      lock.lock();
      --running;
      ++finished;
      for (TaskId s : tasks_[id].successors) {
        if (--pending[s] == 0) ready.push(s);
      }
      cv.notify_all();
    }
  };

  const MalleableTeam team(workers, workers);
  parallel_for(pool, team, {0, workers, 1}, [&](std::size_t, std::size_t rank) { worker_loop(rank); });
  if (error) std::rethrow_exception(error);
}

}  // namespace panelforge::factor

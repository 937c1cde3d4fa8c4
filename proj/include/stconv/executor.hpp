#pragma once

#include <condition_variable>
#include <exception>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace stconv {

/// Fixed-size worker pool. parallel_for hands out indices dynamically, so
/// callers must make each index's work independent of which thread runs it;
/// results are then identical for every thread count.
class Executor {
 public:
  explicit Executor(std::size_t threads = 1);
  ~Executor();

  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  std::size_t threads() const noexcept { return workers_.size() + 1; }

  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const;

  /// Shared single-threaded executor.
  static const Executor& serial();

 private:
  void worker_loop();
  void drain() const;

  std::vector<std::thread> workers_;
  mutable std::mutex mutex_;
  mutable std::condition_variable wake_;
  mutable std::condition_variable done_;
  mutable const std::function<void(std::size_t)>* job_ = nullptr;
  mutable std::size_t job_count_ = 0;
  mutable std::size_t next_index_ = 0;
  mutable std::size_t active_ = 0;
  mutable std::size_t generation_ = 0;
  mutable std::exception_ptr error_;
  mutable std::mutex submit_mutex_;
  bool stopping_ = false;
};

}  // namespace stconv

#include "stconv/executor.hpp"

#include <exception>
#include <utility>

namespace stconv {

namespace {
thread_local bool inside_worker = false;
}  // namespace

Executor::Executor(std::size_t threads) {
  const std::size_t extra = threads > 1 ? threads - 1 : 0;
  workers_.reserve(extra);
  for (std::size_t i = 0; i < extra; ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

Executor::~Executor() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

const Executor& Executor::serial() {
  static const Executor instance(1);
  return instance;
}

void Executor::drain() const {
  for (;;) {
    std::size_t index;
    {
      std::lock_guard lock(mutex_);
      if (next_index_ >= job_count_) return;
      index = next_index_++;
    }
    try {
      (*job_)(index);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      next_index_ = job_count_;
    }
  }
}

void Executor::worker_loop() {
  inside_worker = true;
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
    }
    drain();
    {
      std::lock_guard lock(mutex_);
      if (--active_ == 0) done_.notify_all();
    }
  }
}

void Executor::parallel_for(std::size_t count,
                            const std::function<void(std::size_t)>& body) const {
  if (count == 0) return;
  if (workers_.empty() || count == 1 || inside_worker) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::lock_guard submit(submit_mutex_);
  {
    std::lock_guard lock(mutex_);
    error_ = nullptr;
    job_ = &body;
    job_count_ = count;
    next_index_ = 0;
    active_ = workers_.size();
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::exception_ptr error;
  {
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return active_ == 0; });
    job_ = nullptr;
    error = std::exchange(error_, nullptr);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace stconv

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "stable_loewner/parallel.hpp"

namespace sle::cli {

/// Fixed set of worker threads that executes index loops for the library.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return size_; }
  /// Empty (sequential) when the pool has a single thread.
  ParallelFor policy();

 private:
  void run(std::size_t count, const std::function<void(std::size_t)>& body);
  void work();
  void drain();

  std::size_t size_;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t)>* body_ = nullptr;
  std::size_t count_ = 0, next_ = 0, active_ = 0;
  std::size_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

/// flag > 0 wins; otherwise STABLE_LOEWNER_THREADS; otherwise the hardware
/// concurrency.  Throws ParameterError on a malformed environment value.
std::size_t resolve_thread_count(int flag);

}  // namespace sle::cli

#include "worker_pool.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "stable_loewner/errors.hpp"

namespace sle::cli {

WorkerPool::WorkerPool(std::size_t threads) : size_(std::max<std::size_t>(threads, 1)) {
  // The calling thread takes part in every loop.
  for (std::size_t i = 1; i < size_; ++i) workers_.emplace_back([this] { work(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

ParallelFor WorkerPool::policy() {
  if (size_ <= 1) return {};
  return [this](std::size_t count, const std::function<void(std::size_t)>& body) {
    run(count, body);
  };
}

void WorkerPool::drain() {
  std::unique_lock lock(mutex_);
  while (next_ < count_) {
    const std::size_t i = next_++;
    const auto* body = body_;
    ++active_;
    lock.unlock();
    std::exception_ptr failure;
    try {
      (*body)(i);
    } catch (...) {
      failure = std::current_exception();
    }
    lock.lock();
    --active_;
    if (failure) {
      if (!error_) error_ = failure;
      next_ = count_;
    }
  }
  if (active_ == 0) done_.notify_all();
}

void WorkerPool::work() {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    drain();
  }
}

void WorkerPool::run(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    count_ = count;
    next_ = 0;
    error_ = nullptr;
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return next_ >= count_ && active_ == 0; });
  body_ = nullptr;
  if (error_) {
    auto e = error_;
    error_ = nullptr;
    std::rethrow_exception(e);
  }
}

std::size_t resolve_thread_count(int flag) {
  if (flag > 0) return static_cast<std::size_t>(flag);
  if (const char* env = std::getenv("STABLE_LOEWNER_THREADS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) {
      throw ParameterError(std::string("STABLE_LOEWNER_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace sle::cli

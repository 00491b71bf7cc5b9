#include "graphmix/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace graphmix {

namespace {

thread_local bool tls_inside_task = false;

// Persistent pool. Jobs are published under the mutex; indices are claimed
// with a generation-tagged compare-exchange, so a worker waking from an old
// generation can neither consume nor execute work belonging to a newer job.
class Pool {
public:
  explicit Pool(int workers) {
    for (int i = 0; i < workers; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  ~Pool() {
    {
      std::unique_lock lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(const std::function<void(int)>& task, int count) {
    std::uint64_t gen;
    {
      std::unique_lock lock(mutex_);
      gen = ++generation_;
      task_ = &task;
      count_ = count;
      next_.store(gen << 32, std::memory_order_relaxed);
      pending_.store(count, std::memory_order_relaxed);
    }
    cv_.notify_all();
    execute(&task, count, gen);  // main participates
    while (pending_.load(std::memory_order_acquire) != 0) {
      std::this_thread::yield();
    }
  }

private:
  // The task pointer is dereferenced only after a successful claim, which is
  // impossible once the job's indices are exhausted or a newer generation
  // owns the counter; stale wakeups therefore never touch a dead function.
  void execute(const std::function<void(int)>* task, int count, std::uint64_t gen) {
    const bool was_inside = tls_inside_task;
    tls_inside_task = true;
    for (;;) {
      std::uint64_t cur = next_.load(std::memory_order_acquire);
      if ((cur >> 32) != gen) break;  // a newer job owns the counter
      const int idx = static_cast<int>(cur & 0xffffffffu);
      if (idx >= count) break;
      if (!next_.compare_exchange_weak(cur, cur + 1, std::memory_order_acq_rel)) continue;
      (*task)(idx);
      pending_.fetch_sub(1, std::memory_order_acq_rel);
    }
    tls_inside_task = was_inside;
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(int)>* task;
      int count;
      std::uint64_t gen;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        task = task_;
        count = count_;
        gen = generation_;
      }
      execute(task, count, gen);
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t generation_ = 0;          // guarded by mutex_
  const std::function<void(int)>* task_ = nullptr;  // guarded by mutex_
  int count_ = 0;                         // guarded by mutex_
  std::atomic<std::uint64_t> next_{0};    // (generation << 32) | index
  std::atomic<int> pending_{0};
  bool stop_ = false;
};

Pool& pool() {
  static Pool instance(worker_count() - 1);
  return instance;
}

}  // namespace

int worker_count() {
  static const int count = [] {
    if (const char* env = std::getenv("GRAPHMIX_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return std::min(n, 16);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return std::max(1, std::min(static_cast<int>(hw), 4));
  }();
  return count;
}

bool inside_parallel_task() { return tls_inside_task; }

void parallel_tasks(int count, const std::function<void(int)>& task) {
  if (count <= 0) return;
  if (count == 1 || worker_count() <= 1 || inside_parallel_task()) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  pool().run(task, count);
}

void parallel_rows(int n, const std::function<void(int, int)>& fn) {
  const int w = std::min(worker_count(), n);
  if (w <= 1 || inside_parallel_task()) {
    fn(0, n);
    return;
  }
  const int chunk = (n + w - 1) / w;
  parallel_tasks((n + chunk - 1) / chunk, [&](int idx) {
    const int begin = idx * chunk;
    fn(begin, std::min(n, begin + chunk));
  });
}

}  // namespace graphmix

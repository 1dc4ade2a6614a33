#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace hermlet::par {

inline std::atomic<int>& max_threads_slot() {
  static std::atomic<int> v{0};  // 0 = hardware concurrency
  return v;
}

inline void set_max_threads(int t) { max_threads_slot().store(t); }

inline int effective_threads(std::size_t work_items) {
  int t = max_threads_slot().load();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  if (static_cast<std::size_t>(t) > work_items) t = static_cast<int>(work_items);
  return t < 1 ? 1 : t;
}

/// Runs fn(i) for i in [0, count). Each index is processed exactly once;
/// callers must make fn(i) write only to slot i so results do not depend
/// on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  if (count == 0) return;
  int threads = effective_threads(count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace hermlet::par

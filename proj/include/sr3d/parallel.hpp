#ifndef SR3D_PARALLEL_HPP_
#define SR3D_PARALLEL_HPP_

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sr3d {

/// Runs fn(i) for i in [0, count) on up to `jobs` worker threads. Each index
/// writes its own output slot, so results are identical for any job count;
/// only wall time changes.
inline void parallel_for_indexed(std::size_t count, int jobs,
                                 const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count;
         i = next.fetch_add(1)) {
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads =
      std::min<std::size_t>(jobs, count);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace sr3d

#endif  // SR3D_PARALLEL_HPP_

#include "chb/util.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace chb {

int workerCount(int configured) {
  if (const char* env = std::getenv("CHB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (configured > 0) return configured;
  return 1;
}

void parallelFor(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int used = std::min(workers, n);
  pool.reserve(used);
  for (int w = 0; w < used; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace chb

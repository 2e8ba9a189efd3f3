#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace curvebound {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy.  The CLI maps these to distinct exit codes:
//   ScenarioError -> 2, GeometryError -> 3, NoRootError -> 4,
//   InvariantError -> 5, QuadratureError -> 6.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoRootError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FlowSingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thread count resolution: explicit request > CURVEBOUND_THREADS > hardware.
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CURVEBOUND_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Deterministic parallel loop: every index is an independent pure task, so
// the result does not depend on the number of workers.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  threads = resolve_thread_count(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  std::size_t nw = std::min<std::size_t>(threads, n);
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace curvebound

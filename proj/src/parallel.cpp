#include "perf/parallel.hpp"

#include <atomic>

namespace perf {

namespace {
std::atomic<int> g_workers{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
}

void set_worker_count(int n) { g_workers = std::max(1, n); }

int worker_count() { return g_workers.load(); }

} // namespace perf

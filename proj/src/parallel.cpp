#include "ppcmt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ppcmt {

namespace {

std::atomic<std::size_t> g_thread_limit{SIZE_MAX};  // SIZE_MAX = uninitialized

std::size_t resolve_auto() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::size_t init_from_env() {
    const char* env = std::getenv("PPCMT_THREADS");
    if (env == nullptr) return resolve_auto();
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v < 0) return resolve_auto();
    return v == 0 ? resolve_auto() : static_cast<std::size_t>(v);
}

}  // namespace

std::size_t thread_limit() {
    std::size_t v = g_thread_limit.load(std::memory_order_relaxed);
    if (v == SIZE_MAX) {
        v = init_from_env();
        g_thread_limit.store(v, std::memory_order_relaxed);
    }
    return v;
}

void set_thread_limit(std::size_t n) {
    g_thread_limit.store(n == 0 ? resolve_auto() : n, std::memory_order_relaxed);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t min_per_thread) {
    min_per_thread = std::max<std::size_t>(min_per_thread, 1);
    std::size_t workers = std::min(thread_limit(), n / min_per_thread);
    workers = std::min(workers, n);
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ppcmt

#pragma once

#include <cstddef>
#include <functional>

namespace ppcmt {

// Thread cap for internal data parallelism. 0 = hardware concurrency.
// Initialized from the PPCMT_THREADS environment variable on first use;
// set_thread_limit overrides it for the process.
std::size_t thread_limit();
void set_thread_limit(std::size_t n);

// Runs fn(i) for i in [0, n). Work is split into contiguous ranges and each
// index is processed exactly once, so any kernel that writes only to
// index-i slots produces identical bytes for every thread count.
// `min_per_thread` keeps thread spawns away from workloads too small to pay
// for them; it never changes results, only the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t min_per_thread = 1);

}  // namespace ppcmt

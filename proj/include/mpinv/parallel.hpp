#pragma once

#include <cstddef>
#include <functional>

namespace mpinv {

// Number of worker threads to use: the MPINV_THREADS environment variable
// caps parallelism; unset, empty or "0" means automatic (hardware threads).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across workers.  Results must be written to
// index-addressed slots by the caller, which keeps output deterministic
// regardless of scheduling.  The first exception thrown by any worker is
// rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mpinv

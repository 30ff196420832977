#pragma once

#include <cstddef>
#include <functional>

namespace mhdlag {

/// Number of worker threads used by `parallel_for`. Defaults to 1.
void set_worker_count(int workers);
int worker_count();

/// Calls `body(i)` for every i in [0, n). Indices are split into contiguous
/// blocks, one per worker. Callers write only to slot i of their output, so
/// results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mhdlag

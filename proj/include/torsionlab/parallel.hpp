#pragma once

#include <cstddef>
#include <functional>

namespace torsionlab {

/// Number of worker threads used by Monte Carlo and quadrature loops.
/// Results never depend on this value: work items write to their own slot
/// and reductions run in index order.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count) across the worker pool.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace torsionlab

#pragma once

#include <cstddef>
#include <functional>

namespace coarse {

// Number of worker threads: COARSE_LAB_THREADS when set to a positive
// integer, otherwise the hardware thread count (at least 1).
int workerCount();

// Runs fn(i) for every i in [0, n). Workers take contiguous index ranges,
// so as long as fn(i) writes only to slot i, the combined result is
// independent of the worker count; reductions performed afterwards in
// index order stay bit-identical across thread settings.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace coarse

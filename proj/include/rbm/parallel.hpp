#pragma once

#include <cstdint>
#include <functional>

namespace rbm {

/// Worker count: min(hardware_concurrency, RBM_THREADS if set).
int max_threads();

/// Runs fn(begin, end) over a static partition of [0, n). Workers must write
/// only to disjoint, index-addressed slots; combined with serial reductions
/// this makes every ensemble result independent of the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace rbm

#pragma once

#include <cstddef>
#include <functional>

namespace solitonlab {

// Worker count from SOLITONLAB_WORKERS (default 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n); tasks must write only to their own slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace solitonlab

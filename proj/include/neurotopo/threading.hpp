#ifndef NEUROTOPO_THREADING_HPP
#define NEUROTOPO_THREADING_HPP

#include <cstddef>
#include <functional>

namespace neurotopo {

/// Internal parallelism cap: min(hardware concurrency, NEUROTOPO_THREADS).
/// Reads the environment variable once.
std::size_t max_threads();

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks; callers
/// must write only to per-index slots so results are independent of the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace neurotopo

#endif

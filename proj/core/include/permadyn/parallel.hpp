#ifndef PERMADYN_PARALLEL_HPP
#define PERMADYN_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace permadyn {

/// Run fn(i) for i in [0, n) across up to n_threads workers.
///
/// Tasks must write only to their own pre-allocated slots; reductions are the
/// caller's job and must be done in index order so results do not depend on
/// the degree of parallelism.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned n_threads = 0);

/// Global default worker count (0 = hardware concurrency).
void set_default_threads(unsigned n);
unsigned default_threads();

} // namespace permadyn

#endif

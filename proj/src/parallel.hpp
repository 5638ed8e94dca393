#ifndef SALGRAPH_PARALLEL_HPP_
#define SALGRAPH_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace salgraph::detail {

// Worker cap: SALGRAPH_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// Calls fn(i) for i in [0, n) split into contiguous chunks across workers.
// fn must only write state owned by index i; results are then independent of
// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace salgraph::detail

#endif  // SALGRAPH_PARALLEL_HPP_

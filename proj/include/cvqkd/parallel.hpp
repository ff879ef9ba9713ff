#ifndef CVQKD_PARALLEL_HPP
#define CVQKD_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace cvqkd::parallel {

/// Resolves a worker count: `requested` if positive, else the CVQKD_WORKERS
/// environment variable, else hardware concurrency (at least 1).
int worker_count(int requested);

/// Runs body(index) for index in [0, count) on a pool of workers. The body must
/// be safe to call concurrently for distinct indices. Exceptions are captured
/// and the first one is rethrown after all workers join.
void for_each_index(std::uint64_t count, int workers, const std::function<void(std::uint64_t)>& body);

}  // namespace cvqkd::parallel

#endif  // CVQKD_PARALLEL_HPP

#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lilshs {

/// Number of workers to use: explicit request > LIL_THREADS env var >
/// hardware concurrency. The env var wins over the request when set,
/// matching the CLI contract.
int resolve_threads(int requested = 0);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items must
/// write only to their own output slots; the split is static and the caller
/// observes all results only after return, so results are independent of the
/// worker count. Exceptions are captured and rethrown (first one wins).
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace lilshs

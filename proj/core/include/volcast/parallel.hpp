#pragma once

#include <functional>

namespace volcast {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous chunks by index, so any per-chunk accumulation a caller does in
// chunk order is deterministic regardless of scheduling. threads <= 1 runs
// inline. Exceptions from workers are rethrown on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace volcast

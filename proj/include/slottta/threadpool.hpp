#pragma once

#include <functional>

namespace slottta {

// Worker count: SLOTTTA_THREADS when set, else hardware concurrency.
int worker_count();

// Fork-join loop over [0, n). Work items must be independent; callers that
// need determinism write results into per-index slots. Exceptions from
// workers are rethrown (first one wins).
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace slottta

#pragma once

#include <functional>

namespace chb {

/// Worker count: CHB_THREADS env var wins, then the config value, then 1.
int workerCount(int configured);

/// Index-parallel loop with deterministic result placement; falls back to a
/// plain loop for a single worker.
void parallelFor(int n, int workers, const std::function<void(int)>& fn);

}  // namespace chb

#pragma once

#include <cstddef>
#include <functional>

namespace contrakt {

// Worker cap from CONTRAKT_THREADS, else hardware concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count). Indices are handed out dynamically, so
// body must write only to slot i of caller-owned storage; callers reduce in
// index order to stay scheduling-independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace contrakt

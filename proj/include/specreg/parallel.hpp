#pragma once

#include <cstddef>
#include <functional>

namespace specreg {

/// Runs body(i) for i in [0, count) on up to `threads` workers
/// (0 = hardware concurrency). Indices are split into contiguous blocks;
/// callers write results into pre-sized slots and reduce in index order
/// afterwards, so output does not depend on scheduling. The first exception
/// thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace specreg

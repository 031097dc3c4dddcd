#pragma once

#include <functional>

#include "lqrvol/types.hpp"

namespace lqrvol
{
/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Each index is handled exactly once; if several indices
/// throw, the exception from the lowest index is rethrown after all workers
/// finish.
void parallel_for(Index n, unsigned threads, const std::function<void(Index)>& body);

unsigned resolve_thread_count(unsigned requested);

}  // namespace lqrvol

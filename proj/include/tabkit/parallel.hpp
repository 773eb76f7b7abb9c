#pragma once

#include <cstddef>
#include <functional>

namespace tabkit {

/// Runs fn(i) for every i in [0, n) on up to `threads` workers. Work items
/// must write only to their own slot; callers reduce afterwards in index
/// order so results do not depend on scheduling. The exception of the lowest
/// failing index is rethrown. threads <= 1 runs inline.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace tabkit

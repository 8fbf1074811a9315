#pragma once

#include <functional>

namespace vkns {

// Runs body(k) for k in [0, count) on up to `jobs` threads. The first
// exception thrown by any body is rethrown after all workers stop.
void parallel_for(int count, unsigned jobs, const std::function<void(int)>& body);

}  // namespace vkns

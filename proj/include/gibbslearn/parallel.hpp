#pragma once

#include <cstddef>
#include <functional>

namespace gibbslearn {

// Worker-pool size used by parallel_for. Defaults to 1.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n), handing out indices dynamically. The
// first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gibbslearn

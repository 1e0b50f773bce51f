#pragma once

#include <cstddef>
#include <functional>

namespace vt {

// Worker bound used by parallel_for. 0 means "all hardware threads".
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers write
// results into per-index slots and reduce in index order, so output never
// depends on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace vt

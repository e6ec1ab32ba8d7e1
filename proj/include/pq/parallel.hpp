#pragma once

#include <cstddef>
#include <functional>

namespace pq {

/// Worker count used by sampling and assembly. Zero restores the default
/// (hardware concurrency). Results never depend on this value.
void set_thread_count(unsigned count);
[[nodiscard]] unsigned thread_count();

/// Runs body(begin, end) over a static partition of [0, n). Each index is
/// visited exactly once; callers write results into per-index slots and
/// reduce sequentially afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pq

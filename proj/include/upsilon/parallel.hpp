#pragma once

#include <cstddef>
#include <functional>

namespace upsilon {

/// Runs body(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). Results must be written to per-index slots; the first
/// exception by index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

std::size_t resolve_workers(std::size_t workers);

}  // namespace upsilon

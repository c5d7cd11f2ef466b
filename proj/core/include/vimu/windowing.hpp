#pragma once

#include <cstddef>

namespace vimu {

// round(seconds * rate); throws ConfigError below 5 samples.
std::size_t window_length(double window_seconds, double sample_rate);
// round(length * (1 - overlap)), at least 1. Overlap must lie in [0, 1).
std::size_t window_hop(std::size_t length, double overlap);
// floor((n - length) / hop) + 1 for n >= length, else 0.
std::size_t window_count(std::size_t n, std::size_t length, std::size_t hop);

}  // namespace vimu

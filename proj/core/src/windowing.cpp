#include "vimu/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vimu/error.hpp"

namespace vimu {

std::size_t window_length(double window_seconds, double sample_rate) {
    const double frames = std::round(window_seconds * sample_rate);
    if (!(frames >= 5.0)) {
        throw ConfigError("window of " + std::to_string(window_seconds) + " s at " + std::to_string(sample_rate) +
                          " Hz is shorter than 5 samples");
    }
    return static_cast<std::size_t>(frames);
}

std::size_t window_hop(std::size_t length, double overlap) {
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
    const double hop = std::round(static_cast<double>(length) * (1.0 - overlap));
    return std::max<std::size_t>(1, static_cast<std::size_t>(hop));
}

std::size_t window_count(std::size_t n, std::size_t length, std::size_t hop) {
    if (n < length || length == 0 || hop == 0) return 0;
    return (n - length) / hop + 1;
}

}  // namespace vimu

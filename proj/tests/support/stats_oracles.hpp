#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace vimu::testing {

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a(x) - F_b(x)|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
    }
    return d;
}

// Amplitude of the `freq` Hz component of x, by direct projection over
// samples [begin, end) spanning whole periods.
inline double tone_amplitude(std::span<const double> x, double freq, double rate, std::size_t begin, std::size_t end) {
    double c = 0.0, s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double phase = 2.0 * std::numbers::pi * freq * double(i) / rate;
        c += x[i] * std::cos(phase);
        s += x[i] * std::sin(phase);
    }
    const double n = double(end - begin);
    return 2.0 * std::hypot(c, s) / n;
}

}  // namespace vimu::testing

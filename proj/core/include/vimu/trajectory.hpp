#pragma once

#include <optional>
#include <vector>

#include "vimu/types.hpp"

namespace vimu::trajectory {

/// Positions with holes where a frame was rejected.
struct GappedSeries {
    double sample_rate = 0.0;
    std::vector<std::optional<Vec3>> samples;

    std::vector<bool> present_mask() const;
    std::size_t present_count() const;
};

struct KalmanParams {
    double process_noise = 1.0;      // acceleration random-walk variance, (m/s^2)^2
    double measurement_noise = 0.01; // position variance, m^2
    double initial_variance = 10.0;

    void validate() const;
};

inline constexpr double kDefaultConfidenceThreshold = 0.5;

enum class Interpolation {
    linear,
    cubic,
    // Cubic for interior gaps up to `auto_cubic_max_gap` seconds, linear beyond.
    automatic,
};
inline constexpr double kAutoCubicMaxGap = 0.5;

// Keeps frames whose confidence is >= threshold. Throws ConfigError when
// nothing survives or lengths differ.
GappedSeries gate_by_confidence(const Vec3Series& positions, const std::vector<double>& confidence,
                                double threshold, double sample_rate);

/// Fills every gap. Present samples are returned untouched, leading and
/// trailing gaps take the nearest present value.
///
/// The cubic interpolant is the Lagrange cubic through the two nearest
/// present samples on each side of the gap (borrowing from the other side
/// near the ends), so it reproduces cubic polynomials exactly.
Vec3Series interpolate_gaps(const GappedSeries& series, Interpolation method);

/// Per-axis constant-velocity Kalman filter followed by a Rauch-Tung-Striebel
/// backward pass. The state starts at the first sample with the velocity of
/// the first two samples.
Vec3Series kalman_smooth(const Vec3Series& positions, double sample_rate, const KalmanParams& params = {});

// Multiplies every position by known_length / estimated_length.
Vec3Series resolve_scale(const Vec3Series& positions, double known_length, double estimated_length);

}  // namespace vimu::trajectory

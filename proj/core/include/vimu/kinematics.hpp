#pragma once

#include <span>
#include <string>
#include <vector>

#include "vimu/error.hpp"
#include "vimu/types.hpp"

namespace vimu::kinematics {

/// Second-derivative estimate with a flag on samples that used a fallback
/// (one-sided or lower-order) stencil.
struct Derivative {
    Vec3Series values;
    std::vector<bool> boundary;
};

/// Three-point central stencil, O(h^2). End samples use the one-sided
/// four-point stencil (2, -5, 4, -1) when at least four samples exist.
template <typename T>
std::vector<T> central_second_derivative(std::span<const T> x, T rate) {
    const std::size_t n = x.size();
    if (n < 3) throw ConfigError("central second derivative needs at least 3 samples");
    const T r2 = rate * rate;
    std::vector<T> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i - 1] - 2 * x[i] + x[i + 1]) * r2;
    if (n >= 4) {
        d[0] = (2 * x[0] - 5 * x[1] + 4 * x[2] - x[3]) * r2;
        d[n - 1] = (2 * x[n - 1] - 5 * x[n - 2] + 4 * x[n - 3] - x[n - 4]) * r2;
    } else {
        d[0] = d[1];
        d[2] = d[1];
    }
    return d;
}

/// Richardson-extrapolated five-point stencil, O(h^4):
/// (-x[i-2] + 16 x[i-1] - 30 x[i] + 16 x[i+1] - x[i+2]) rate^2 / 12.
/// The two samples at each end fall back to the central stencil.
template <typename T>
std::vector<T> richardson_second_derivative(std::span<const T> x, T rate) {
    const std::size_t n = x.size();
    if (n < 5) throw ConfigError("Richardson second derivative needs at least 5 samples");
    std::vector<T> d = central_second_derivative(x, rate);
    const T r2 = rate * rate;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (-x[i - 2] + 16 * x[i - 1] - 30 * x[i] + 16 * x[i + 1] - x[i + 2]) * r2 / 12;
    }
    return d;
}

Derivative central_second_derivative(const Vec3Series& positions, double rate);
Derivative richardson_second_derivative(const Vec3Series& positions, double rate);

/// Orthonormal frame attached to a triangle. Columns of `axes` are e1 (along
/// the first edge), e2 = e3 x e1, and e3, the normal of the counter-clockwise
/// winding v0 -> v1 -> v2.
struct TriangleTriad {
    Vec3 origin;
    Mat3 axes;
};

// Throws ConfigError for triangles with area <= 1e-12 m^2.
TriangleTriad triangle_triad(const Vec3& v0, const Vec3& v1, const Vec3& v2);

/// Spatial angular velocity from consecutive orientations:
/// w[i] = log(R[i+1] R[i]^T) * rate. The last sample repeats its predecessor.
/// Throws NumericalError when a step rotates by pi or more.
Vec3Series angular_velocity(const RotationSeries& rotations, double rate);
Vec3Series angular_velocity(const std::vector<TriangleTriad>& triads, double rate);

/// Analytic global-frame motion of a skin region: Richardson acceleration of
/// the mean triangle centroid and the triangle-averaged angular velocity.
struct GlobalMotion {
    Vec3Series accel;
    Vec3Series gyro;
    std::vector<bool> boundary;
};
GlobalMotion region_motion(const MotionTrackSet& set, const std::string& region);

/// a_S = (R_S^B)^-1 (R_B^G)^-1 (a_G + g),  w_S = (R_S^B)^-1 (R_B^G)^-1 w_G.
ImuSeries to_sensor_frame(const Vec3Series& accel_global, const Vec3Series& gyro_global,
                          const RotationSeries& bone_to_global, const SensorSpec& spec);
ImuSeries to_sensor_frame(const ImuSeries& global, const RotationSeries& bone_to_global, const SensorSpec& spec);

/// Algebraic inverse of to_sensor_frame: a_G = R_B^G R_S^B a_S - g.
ImuSeries from_sensor_frame(const ImuSeries& sensor, const RotationSeries& bone_to_global, const SensorSpec& spec);

}  // namespace vimu::kinematics

#include "vimu/kinematics.hpp"

#include <cmath>
#include <numbers>

namespace vimu::kinematics {

namespace {

template <typename Stencil>
Derivative per_axis(const Vec3Series& positions, double rate, Stencil stencil, std::size_t edge) {
    const std::size_t n = positions.size();
    Derivative out;
    out.values.assign(n, Vec3::Zero());
    std::vector<double> axis(n);
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < n; ++i) axis[i] = positions[i][k];
        std::vector<double> d = stencil(std::span<const double>(axis), rate);
        for (std::size_t i = 0; i < n; ++i) out.values[i][k] = d[i];
    }
    out.boundary.assign(n, false);
    for (std::size_t i = 0; i < std::min(edge, n); ++i) {
        out.boundary[i] = true;
        out.boundary[n - 1 - i] = true;
    }
    return out;
}

void check_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("sample rate must be positive");
}

}  // namespace

Derivative central_second_derivative(const Vec3Series& positions, double rate) {
    check_rate(rate);
    return per_axis(
        positions, rate,
        [](std::span<const double> x, double r) { return central_second_derivative<double>(x, r); }, 1);
}

Derivative richardson_second_derivative(const Vec3Series& positions, double rate) {
    check_rate(rate);
    return per_axis(
        positions, rate,
        [](std::span<const double> x, double r) { return richardson_second_derivative<double>(x, r); }, 2);
}

TriangleTriad triangle_triad(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    const Vec3 edge1 = v1 - v0;
    const Vec3 normal = edge1.cross(v2 - v0);
    if (!(0.5 * normal.norm() > 1e-12)) throw ConfigError("degenerate triangle (area <= 1e-12 m^2)");
    TriangleTriad t;
    t.origin = (v0 + v1 + v2) / 3.0;
    const Vec3 e1 = edge1.normalized();
    const Vec3 e3 = normal.normalized();
    const Vec3 e2 = e3.cross(e1);
    t.axes.col(0) = e1;
    t.axes.col(1) = e2;
    t.axes.col(2) = e3;
    return t;
}

Vec3Series angular_velocity(const RotationSeries& rotations, double rate) {
    check_rate(rate);
    const std::size_t n = rotations.size();
    if (n < 2) throw ConfigError("angular velocity needs at least 2 orientations");
    Vec3Series w(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Mat3 delta = rotations[i + 1] * rotations[i].transpose();
        const Eigen::AngleAxisd aa(delta);
        if (aa.angle() >= std::numbers::pi - 1e-9) {
            throw NumericalError("rotation between frames " + std::to_string(i) + " and " +
                                 std::to_string(i + 1) + " reaches pi; the sampling rate is too low");
        }
        w[i] = aa.axis() * (aa.angle() * rate);
    }
    w[n - 1] = w[n - 2];
    return w;
}

Vec3Series angular_velocity(const std::vector<TriangleTriad>& triads, double rate) {
    RotationSeries rotations;
    rotations.reserve(triads.size());
    for (const auto& t : triads) rotations.push_back(t.axes);
    return angular_velocity(rotations, rate);
}

GlobalMotion region_motion(const MotionTrackSet& set, const std::string& name) {
    const Region& region = set.region(name);
    const std::size_t n = set.frame_count;

    Vec3Series centre(n, Vec3::Zero());
    std::array<std::vector<TriangleTriad>, 3> triads;
    for (auto& t : triads) t.reserve(n);
    for (std::size_t f = 0; f < n; ++f) {
        for (std::size_t tri = 0; tri < 3; ++tri) {
            auto v = set.triangle(region, tri, f);
            triads[tri].push_back(triangle_triad(v[0], v[1], v[2]));
            centre[f] += triads[tri].back().origin;
        }
        centre[f] /= 3.0;
    }

    GlobalMotion out;
    Derivative acc = richardson_second_derivative(centre, set.sample_rate);
    out.accel = std::move(acc.values);
    out.boundary = std::move(acc.boundary);
    out.gyro.assign(n, Vec3::Zero());
    for (std::size_t tri = 0; tri < 3; ++tri) {
        Vec3Series w = angular_velocity(triads[tri], set.sample_rate);
        for (std::size_t f = 0; f < n; ++f) out.gyro[f] += w[f];
    }
    for (Vec3& w : out.gyro) w /= 3.0;
    return out;
}

ImuSeries to_sensor_frame(const Vec3Series& accel_global, const Vec3Series& gyro_global,
                          const RotationSeries& bone_to_global, const SensorSpec& spec) {
    const std::size_t n = accel_global.size();
    if (gyro_global.size() != n || bone_to_global.size() != n) {
        throw ConfigError("to_sensor_frame: accel, gyro and orientation series differ in length");
    }
    ImuSeries out;
    out.frame = FrameTag::sensor;
    out.sample_rate = spec.sample_rate;
    out.accel.resize(n);
    out.gyro.resize(n);
    const Mat3 bone_to_sensor = spec.sensor_to_bone.transpose();
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3 global_to_sensor = bone_to_sensor * bone_to_global[i].transpose();
        out.accel[i] = global_to_sensor * (accel_global[i] + spec.gravity);
        out.gyro[i] = global_to_sensor * gyro_global[i];
    }
    return out;
}

ImuSeries to_sensor_frame(const ImuSeries& global, const RotationSeries& bone_to_global, const SensorSpec& spec) {
    if (global.frame != FrameTag::global) throw ConfigError("to_sensor_frame expects a global-frame series");
    ImuSeries out = to_sensor_frame(global.accel, global.gyro, bone_to_global, spec);
    out.sample_rate = global.sample_rate;
    return out;
}

ImuSeries from_sensor_frame(const ImuSeries& sensor, const RotationSeries& bone_to_global, const SensorSpec& spec) {
    const std::size_t n = sensor.size();
    if (sensor.gyro.size() != n || bone_to_global.size() != n) {
        throw ConfigError("from_sensor_frame: IMU and orientation series differ in length");
    }
    if (sensor.frame != FrameTag::sensor) throw ConfigError("from_sensor_frame expects a sensor-frame series");
    ImuSeries out;
    out.frame = FrameTag::global;
    out.sample_rate = sensor.sample_rate;
    out.accel.resize(n);
    out.gyro.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3 sensor_to_global = bone_to_global[i] * spec.sensor_to_bone;
        out.accel[i] = sensor_to_global * sensor.accel[i] - spec.gravity;
        out.gyro[i] = sensor_to_global * sensor.gyro[i];
    }
    return out;
}

}  // namespace vimu::kinematics

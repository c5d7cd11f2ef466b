#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vimu {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Vec3Series = std::vector<Vec3>;
using RotationSeries = std::vector<Mat3>;

inline constexpr double kStandardGravity = 9.80665;

enum class FrameTag { global, sensor };

const char* to_string(FrameTag tag);
FrameTag frame_tag_from_string(const std::string& text);

/// Three-axis accelerometer (m/s^2) and gyroscope (rad/s) samples in one frame.
struct ImuSeries {
    FrameTag frame = FrameTag::sensor;
    double sample_rate = 0.0;
    Vec3Series accel;
    Vec3Series gyro;

    std::size_t size() const noexcept { return accel.size(); }

    // Throws ConfigError on unequal lengths, NumericalError on non-finite samples.
    void validate() const;
};

/// Where a virtual sensor sits and how it is mounted.
///
/// `sensor_to_bone` maps sensor-frame vectors into the bone frame. `gravity` is
/// the vector added to global acceleration before rotating into the sensor
/// frame; flip its sign to model the opposite accelerometer convention.
struct SensorSpec {
    std::string region;
    Mat3 sensor_to_bone = Mat3::Identity();
    Vec3 gravity{0.0, 0.0, kStandardGravity};
    double sample_rate = 0.0;

    void validate() const;
};

/// Three counter-clockwise triangles near the centre of a skin area, plus the
/// per-frame orientation of the underlying body segment (bone to global).
struct Region {
    std::array<std::array<int, 3>, 3> triangles{};
    std::vector<Quat> orientation;

    std::array<int, 9> vertex_ids() const;
};

/// Global-frame vertex tracks for named skin regions.
struct MotionTrackSet {
    double sample_rate = 0.0;
    std::size_t frame_count = 0;
    std::map<int, Vec3Series> vertices;
    std::map<std::string, Region> regions;
    std::optional<std::vector<double>> confidence;

    // Throws ConfigError when the region does not exist.
    const Region& region(const std::string& name) const;

    double confidence_at(std::size_t frame) const;

    // Positions of the three corners of triangle `tri` of `region` at `frame`.
    std::array<Vec3, 3> triangle(const Region& region, std::size_t tri, std::size_t frame) const;

    // Orientation track of a region as rotation matrices.
    RotationSeries bone_to_global(const std::string& region) const;

    // Throws FormatError naming the violated invariant (and region/frame).
    void validate() const;
};

/// Rotation matrix validity check: orthonormal with determinant +1.
bool is_rotation(const Mat3& r, double tol = 1e-9);

}  // namespace vimu

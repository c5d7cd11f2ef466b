#pragma once

#include <string>

#include "vimu/types.hpp"

namespace vimu::io {

inline constexpr int kTrackFormatVersion = 1;
inline constexpr int kSensorSpecVersion = 1;

/// Mesh-track files come in pairs: `<name>.tracks.json` (manifest) and
/// `<name>.tracks.csv` (one row per frame). `path` may name either file or
/// the common `<name>` stem.
///
/// Orientation columns are `qw,qx,qy,qz` when the set has one region and
/// `<region>_qw,...` otherwise. Quaternions within 1e-3 of unit norm are
/// renormalized; anything further off is rejected.
MotionTrackSet load_track_set(const std::string& path);
void store_track_set(const MotionTrackSet& set, const std::string& path);

// Stem shared by the manifest and CSV of a track set.
std::string track_set_stem(const std::string& path);

/// IMU CSV: `# frame=<global|sensor> rate=<Hz>` then `t,ax,ay,az,gx,gy,gz`.
ImuSeries read_imu_csv(const std::string& path);
void write_imu_csv(const ImuSeries& series, const std::string& path);

/// `{version:1, region, rotation:{quat:[w,x,y,z]}, gravity:[gx,gy,gz], sample_rate}`.
/// `rotation:{matrix:[[...],[...],[...]]}` is accepted as well.
SensorSpec load_sensor_spec(const std::string& path);
void store_sensor_spec(const SensorSpec& spec, const std::string& path);

// Normalizes a stored quaternion or throws FormatError mentioning `where`.
Quat checked_unit_quaternion(double w, double x, double y, double z, const std::string& where);

// Shared number formatting: 17 significant digits.
std::string format_double(double value);

}  // namespace vimu::io

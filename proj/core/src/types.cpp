#include "vimu/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "vimu/error.hpp"

namespace vimu {

const char* to_string(FrameTag tag) {
    return tag == FrameTag::global ? "global" : "sensor";
}

FrameTag frame_tag_from_string(const std::string& text) {
    if (text == "global") return FrameTag::global;
    if (text == "sensor") return FrameTag::sensor;
    throw FormatError("unknown frame tag '" + text + "' (expected global or sensor)");
}

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

void ImuSeries::validate() const {
    if (accel.size() != gyro.size()) {
        throw ConfigError("IMU series has " + std::to_string(accel.size()) + " accel samples but " +
                          std::to_string(gyro.size()) + " gyro samples");
    }
    for (std::size_t i = 0; i < accel.size(); ++i) {
        if (!finite(accel[i]) || !finite(gyro[i])) {
            throw NumericalError("IMU series has a non-finite value at sample " + std::to_string(i));
        }
    }
}

bool is_rotation(const Mat3& r, double tol) {
    if (!r.allFinite()) return false;
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

void SensorSpec::validate() const {
    if (!is_rotation(sensor_to_bone)) {
        throw ConfigError("sensor spec: sensor-to-bone rotation is not orthonormal with det +1");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ConfigError("sensor spec: sample_rate must be positive");
    }
    if (!gravity.allFinite()) throw ConfigError("sensor spec: gravity must be finite");
}

std::array<int, 9> Region::vertex_ids() const {
    std::array<int, 9> ids{};
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t k = 0; k < 3; ++k) ids[t * 3 + k] = triangles[t][k];
    return ids;
}

const Region& MotionTrackSet::region(const std::string& name) const {
    auto it = regions.find(name);
    if (it == regions.end()) throw ConfigError("unknown region '" + name + "'");
    return it->second;
}

double MotionTrackSet::confidence_at(std::size_t frame) const {
    return confidence ? (*confidence)[frame] : 1.0;
}

std::array<Vec3, 3> MotionTrackSet::triangle(const Region& r, std::size_t tri, std::size_t frame) const {
    std::array<Vec3, 3> out;
    for (std::size_t k = 0; k < 3; ++k) out[k] = vertices.at(r.triangles[tri][k])[frame];
    return out;
}

RotationSeries MotionTrackSet::bone_to_global(const std::string& name) const {
    const Region& r = region(name);
    RotationSeries out;
    out.reserve(r.orientation.size());
    for (const Quat& q : r.orientation) out.push_back(q.toRotationMatrix());
    return out;
}

void MotionTrackSet::validate() const {
    if (!(sample_rate > 0.0)) throw FormatError("track set: sample_rate must be positive");
    if (confidence && confidence->size() != frame_count) {
        throw FormatError("track set: confidence has " + std::to_string(confidence->size()) +
                          " frames, expected " + std::to_string(frame_count));
    }
    if (confidence) {
        for (std::size_t f = 0; f < frame_count; ++f) {
            double c = (*confidence)[f];
            if (!(c >= 0.0 && c <= 1.0)) {
                throw FormatError("track set: confidence outside [0,1] at frame " + std::to_string(f));
            }
        }
    }
    for (const auto& [vid, track] : vertices) {
        if (track.size() != frame_count) {
            throw FormatError("track set: vertex " + std::to_string(vid) + " has " +
                              std::to_string(track.size()) + " frames, expected " +
                              std::to_string(frame_count));
        }
        for (std::size_t f = 0; f < frame_count; ++f) {
            if (!track[f].allFinite()) {
                throw FormatError("track set: vertex " + std::to_string(vid) +
                                  " is non-finite at frame " + std::to_string(f));
            }
        }
    }
    for (const auto& [name, r] : regions) {
        auto ids = r.vertex_ids();
        std::set<int> distinct(ids.begin(), ids.end());
        if (distinct.size() != 9) {
            throw FormatError("region '" + name + "': triangles must use 9 distinct vertex ids");
        }
        for (int vid : ids) {
            if (!vertices.count(vid)) {
                throw FormatError("region '" + name + "': vertex " + std::to_string(vid) + " has no track");
            }
        }
        if (r.orientation.size() != frame_count) {
            throw FormatError("region '" + name + "': orientation has " +
                              std::to_string(r.orientation.size()) + " frames, expected " +
                              std::to_string(frame_count));
        }
        for (std::size_t f = 0; f < frame_count; ++f) {
            if (std::abs(r.orientation[f].norm() - 1.0) > 1e-6) {
                throw FormatError("region '" + name + "': quaternion not unit-norm at frame " +
                                  std::to_string(f));
            }
            for (std::size_t t = 0; t < 3; ++t) {
                auto v = triangle(r, t, f);
                double area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
                if (!(area > 1e-12)) {
                    std::ostringstream msg;
                    msg << "region '" << name << "': triangle " << t << " is degenerate (area " << area
                        << ") at frame " << f;
                    throw FormatError(msg.str());
                }
            }
        }
    }
}

}  // namespace vimu

#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <unistd.h>

#include "vimu/types.hpp"

namespace vimu::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("vimu_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

using PositionFn = std::function<Vec3(double)>;
using RotationFn = std::function<Mat3(double)>;

// Nine body-frame vertices forming three counter-clockwise triangles around
// the patch centre, outward normal +z.
inline std::array<Vec3, 9> patch_vertices() {
    return {Vec3(0.00, 0.00, 0.0), Vec3(0.02, 0.00, 0.0), Vec3(0.00, 0.02, 0.0),
            Vec3(-0.01, -0.01, 0.0), Vec3(0.01, -0.02, 0.0), Vec3(0.015, -0.005, 0.0),
            Vec3(-0.02, 0.01, 0.0), Vec3(-0.03, -0.01, 0.0), Vec3(-0.01, 0.005, 0.0)};
}

/// A rigid skin patch moving with `position(t)` and orientation `rotation(t)`
/// (bone to global), sampled at `rate` for `frames` frames, in region `name`.
inline MotionTrackSet rigid_patch(const PositionFn& position, const RotationFn& rotation, double rate,
                                  std::size_t frames, const std::string& name = "wrist") {
    MotionTrackSet set;
    set.sample_rate = rate;
    set.frame_count = frames;
    const auto local = patch_vertices();
    Region region;
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t k = 0; k < 3; ++k) region.triangles[t][k] = static_cast<int>(100 + 3 * t + k);
    for (std::size_t f = 0; f < frames; ++f) {
        const double time = static_cast<double>(f) / rate;
        const Vec3 p = position(time);
        const Mat3 r = rotation(time);
        for (std::size_t v = 0; v < 9; ++v) set.vertices[static_cast<int>(100 + v)].push_back(p + r * local[v]);
        region.orientation.push_back(Quat(r).normalized());
    }
    set.regions.emplace(name, std::move(region));
    return set;
}

inline Mat3 rot_z(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(); }

inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Quat q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

}  // namespace vimu::testing

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vimu/types.hpp"

namespace vimu::bvh {

enum class Channel { x_position, y_position, z_position, x_rotation, y_rotation, z_rotation };

const char* to_string(Channel c);

struct Joint {
    std::string name;
    std::optional<std::size_t> parent;
    Vec3 offset = Vec3::Zero();
    std::vector<Channel> channels;
    bool end_site = false;
    // Index of this joint's first value in a frame row.
    std::size_t channel_offset = 0;

    bool operator==(const Joint&) const = default;
};

/// A parsed BVH document. Joints are stored in declaration order, so every
/// parent precedes its children. Rotations are in degrees, lengths as authored.
struct SkeletonAnimation {
    std::vector<Joint> joints;
    std::size_t frame_count = 0;
    double frame_time = 0.0;
    std::vector<std::vector<double>> frames;

    std::size_t channel_count() const;
    std::optional<std::size_t> find_joint(std::string_view name) const;
    void validate() const;

    bool operator==(const SkeletonAnimation&) const = default;
};

struct JointPose {
    Vec3 position;
    Quat orientation;
};

// Throws FormatError carrying the offending line number.
SkeletonAnimation parse_bvh(std::string_view text);
SkeletonAnimation load_bvh(const std::string& path);

// Values are written in shortest round-trip form, so parse(serialize(a)) == a.
std::string serialize_bvh(const SkeletonAnimation& anim);

/// Global pose of every joint at `frame`.
///
/// Each joint's local transform is a translation by its offset (plus any
/// position channels) followed by its rotation channels composed in the order
/// they are written, as intrinsic right-handed rotations.
std::vector<JointPose> forward_kinematics(const SkeletonAnimation& anim, std::size_t frame);

// Position and orientation tracks of one joint over every frame, lengths
// multiplied by `length_scale`.
struct JointTrack {
    double sample_rate = 0.0;
    Vec3Series positions;
    RotationSeries orientations;
};
JointTrack joint_track(const SkeletonAnimation& anim, std::size_t joint, double length_scale = 1.0);

}  // namespace vimu::bvh

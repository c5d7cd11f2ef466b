#pragma once

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "vimu/kinematics.hpp"
#include "vimu/simnet.hpp"

namespace vimu::testing {

// A skin patch swinging and twisting like a forearm, `frames` long at `rate`.
inline MotionTrackSet swinging_patch(double rate, std::size_t frames, double phase = 0.0) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return rigid_patch(
        [phase](double t) {
            return Vec3(0.3 * std::sin(two_pi * 0.8 * t + phase), 1.0 + 0.1 * std::cos(two_pi * 1.3 * t),
                        0.2 * std::sin(two_pi * 0.5 * t + 2 * phase));
        },
        [phase](double t) {
            return Mat3(Eigen::AngleAxisd(0.6 * std::sin(two_pi * 0.7 * t + phase), Vec3::UnitX()) *
                        Eigen::AngleAxisd(0.4 * std::cos(two_pi * 0.9 * t), Vec3::UnitZ()));
        },
        rate, frames);
}

// Global-frame analytic IMU of region "wrist", used as training targets.
inline ImuSeries analytic_targets(const MotionTrackSet& set) {
    const kinematics::GlobalMotion m = kinematics::region_motion(set, "wrist");
    ImuSeries s;
    s.frame = FrameTag::global;
    s.sample_rate = set.sample_rate;
    s.accel = m.accel;
    s.gyro = m.gyro;
    return s;
}

inline simnet::NetworkConfig small_network() {
    simnet::NetworkConfig cfg;
    cfg.conv_channels = {16, 16, 16};
    cfg.kernel = 5;
    cfg.lstm_hidden = {16, 16};
    return cfg;
}

/// Central-difference gradient check on `count` coordinates drawn with `seed`.
/// Returns the largest |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline double max_gradient_error(const simnet::WeightBundle& weights, std::span<const simnet::Matrix> inputs,
                                 std::span<const simnet::Matrix> targets, std::size_t count, std::uint64_t seed,
                                 double h = 1e-5, double floor = 1e-6) {
    const simnet::LossGradient lg = simnet::loss_and_gradient(weights, inputs, targets);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, weights.params.size() - 1);
    simnet::WeightBundle probe = weights;
    double worst = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const Eigen::Index i = pick(rng);
        const double original = probe.params[i];
        probe.params[i] = original + h;
        const double up = simnet::loss_and_gradient(probe, inputs, targets).loss;
        probe.params[i] = original - h;
        const double down = simnet::loss_and_gradient(probe, inputs, targets).loss;
        probe.params[i] = original;
        const double numeric = (up - down) / (2 * h);
        const double analytic = lg.gradient[i];
        const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    return worst;
}

}  // namespace vimu::testing

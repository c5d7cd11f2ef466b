#include "vimu/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vimu/error.hpp"

namespace vimu::trajectory {

std::vector<bool> GappedSeries::present_mask() const {
    std::vector<bool> mask(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) mask[i] = samples[i].has_value();
    return mask;
}

std::size_t GappedSeries::present_count() const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.has_value(); }));
}

void KalmanParams::validate() const {
    if (!(process_noise > 0.0) || !(measurement_noise > 0.0) || !(initial_variance > 0.0)) {
        throw ConfigError("Kalman parameters must all be strictly positive");
    }
}

GappedSeries gate_by_confidence(const Vec3Series& positions, const std::vector<double>& confidence,
                                double threshold, double sample_rate) {
    if (positions.size() != confidence.size()) {
        throw ConfigError("gate_by_confidence: " + std::to_string(positions.size()) + " positions but " +
                          std::to_string(confidence.size()) + " confidence values");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("confidence threshold must lie in [0,1]");
    GappedSeries out;
    out.sample_rate = sample_rate;
    out.samples.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (confidence[i] >= threshold) out.samples[i] = positions[i];
    }
    if (out.present_count() == 0) throw ConfigError("every frame fell below the confidence threshold");
    return out;
}

namespace {

Vec3 lagrange(const std::vector<std::size_t>& knots, const GappedSeries& g, double t) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t a = 0; a < knots.size(); ++a) {
        double w = 1.0;
        for (std::size_t b = 0; b < knots.size(); ++b) {
            if (a == b) continue;
            w *= (t - static_cast<double>(knots[b])) /
                 (static_cast<double>(knots[a]) - static_cast<double>(knots[b]));
        }
        acc += w * *g.samples[knots[a]];
    }
    return acc;
}

}  // namespace

Vec3Series interpolate_gaps(const GappedSeries& g, Interpolation method) {
    if (g.present_count() < 2) throw ConfigError("interpolation needs at least 2 present samples");

    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < g.samples.size(); ++i)
        if (g.samples[i]) present.push_back(i);

    Vec3Series out(g.samples.size());
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        if (g.samples[i]) out[i] = *g.samples[i];
    }
    for (std::size_t i = 0; i < present.front(); ++i) out[i] = *g.samples[present.front()];
    for (std::size_t i = present.back() + 1; i < g.samples.size(); ++i) out[i] = *g.samples[present.back()];

    for (std::size_t k = 0; k + 1 < present.size(); ++k) {
        const std::size_t lo = present[k];
        const std::size_t hi = present[k + 1];
        if (hi == lo + 1) continue;

        bool cubic = method == Interpolation::cubic;
        if (method == Interpolation::automatic) {
            double gap_seconds = g.sample_rate > 0.0 ? static_cast<double>(hi - lo) / g.sample_rate : 0.0;
            cubic = gap_seconds <= kAutoCubicMaxGap;
        }
        cubic = cubic && present.size() >= 4;

        if (!cubic) {
            const Vec3& a = *g.samples[lo];
            const Vec3& b = *g.samples[hi];
            for (std::size_t i = lo + 1; i < hi; ++i) {
                double s = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
                out[i] = a + s * (b - a);
            }
            continue;
        }

        // Two knots on each side, shifted inwards at the ends of the record.
        std::size_t first = k >= 1 ? k - 1 : 0;
        if (first + 4 > present.size()) first = present.size() - 4;
        std::vector<std::size_t> knots(present.begin() + static_cast<std::ptrdiff_t>(first),
                                       present.begin() + static_cast<std::ptrdiff_t>(first + 4));
        for (std::size_t i = lo + 1; i < hi; ++i) out[i] = lagrange(knots, g, static_cast<double>(i));
    }
    return out;
}

Vec3Series kalman_smooth(const Vec3Series& positions, double sample_rate, const KalmanParams& params) {
    params.validate();
    if (positions.size() < 2) throw ConfigError("kalman_smooth needs at least 2 samples");
    if (!(sample_rate > 0.0)) throw ConfigError("kalman_smooth needs a positive sample rate");

    using Vec2 = Eigen::Vector2d;
    using Mat2 = Eigen::Matrix2d;

    const std::size_t n = positions.size();
    const double dt = 1.0 / sample_rate;
    Mat2 F;
    F << 1.0, dt, 0.0, 1.0;
    Mat2 Q;
    Q << dt * dt * dt * dt / 4.0, dt * dt * dt / 2.0, dt * dt * dt / 2.0, dt * dt;
    Q *= params.process_noise;
    const double R = params.measurement_noise;

    Vec3Series out(n);
    std::vector<Vec2> x_pred(n), x_filt(n);
    std::vector<Mat2> P_pred(n), P_filt(n);

    for (int axis = 0; axis < 3; ++axis) {
        Vec2 x(positions[0][axis], (positions[1][axis] - positions[0][axis]) * sample_rate);
        Mat2 P = Mat2::Identity() * params.initial_variance;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                x = F * x;
                P = F * P * F.transpose() + Q;
            }
            x_pred[i] = x;
            P_pred[i] = P;
            double innovation = positions[i][axis] - x[0];
            double S = P(0, 0) + R;
            Vec2 K = P.col(0) / S;
            x = x + K * innovation;
            // Joseph form keeps P symmetric positive definite.
            Mat2 I_KH = Mat2::Identity();
            I_KH(0, 0) -= K[0];
            I_KH(1, 0) -= K[1];
            P = I_KH * P * I_KH.transpose() + K * R * K.transpose();
            x_filt[i] = x;
            P_filt[i] = P;
        }
        Vec2 xs = x_filt[n - 1];
        out[n - 1][axis] = xs[0];
        for (std::size_t i = n - 1; i-- > 0;) {
            Mat2 C = P_filt[i] * F.transpose() * P_pred[i + 1].inverse();
            xs = x_filt[i] + C * (xs - x_pred[i + 1]);
            out[i][axis] = xs[0];
        }
    }
    return out;
}

Vec3Series resolve_scale(const Vec3Series& positions, double known_length, double estimated_length) {
    if (!(known_length > 0.0) || !(estimated_length > 0.0)) {
        throw ConfigError("resolve_scale: lengths must be strictly positive");
    }
    const double factor = known_length / estimated_length;
    Vec3Series out;
    out.reserve(positions.size());
    for (const Vec3& p : positions) out.push_back(p * factor);
    return out;
}

}  // namespace vimu::trajectory

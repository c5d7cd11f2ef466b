#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vimu/error.hpp"
#include "vimu/trajectory.hpp"

using namespace vimu;
using namespace vimu::trajectory;

namespace {

GappedSeries gapped(const Vec3Series& full, const std::vector<bool>& keep, double rate) {
    GappedSeries g;
    g.sample_rate = rate;
    for (std::size_t i = 0; i < full.size(); ++i) g.samples.push_back(keep[i] ? std::optional<Vec3>(full[i]) : std::nullopt);
    return g;
}

double rmse_to(const Vec3Series& a, const Vec3Series& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
    return std::sqrt(s / (3.0 * static_cast<double>(a.size())));
}

Vec3Series line(std::size_t n, double rate, const Vec3& p0, const Vec3& v) {
    Vec3Series out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(p0 + v * (static_cast<double>(i) / rate));
    return out;
}

}  // namespace

TEST(Gate, MasksLowConfidence) {
    const Vec3Series p{Vec3(1, 2, 3), Vec3(4, 5, 6), Vec3(7, 8, 9)};
    const GappedSeries g = gate_by_confidence(p, {0.9, 0.2, 0.8}, 0.5, 30.0);
    EXPECT_EQ(g.present_mask(), (std::vector<bool>{true, false, true}));
    EXPECT_EQ(*g.samples[0], p[0]);
    EXPECT_EQ(*g.samples[2], p[2]);
}

TEST(Gate, ZeroThresholdKeepsAll) {
    const Vec3Series p{Vec3(1, 2, 3), Vec3(4, 5, 6)};
    EXPECT_EQ(gate_by_confidence(p, {0.0, 0.3}, 0.0, 30.0).present_count(), 2u);
}

TEST(Gate, AllRejectedIsError) {
    const Vec3Series p{Vec3(1, 2, 3), Vec3(4, 5, 6)};
    EXPECT_THROW(gate_by_confidence(p, {0.1, 0.3}, 0.5, 30.0), ConfigError);
    EXPECT_THROW(gate_by_confidence(p, {0.9}, 0.5, 30.0), ConfigError);
}

TEST(Gate, ThresholdZeroThenInterpolateIsIdentity) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    Vec3Series p;
    std::vector<double> conf;
    for (int i = 0; i < 40; ++i) {
        p.emplace_back(n(rng), n(rng), n(rng));
        conf.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
    }
    for (auto method : {Interpolation::linear, Interpolation::cubic, Interpolation::automatic})
        EXPECT_EQ(interpolate_gaps(gate_by_confidence(p, conf, 0.0, 30.0), method), p);
}

TEST(Interpolate, LinearMidpoint) {
    const GappedSeries g = gapped({Vec3(0, 0, 0), Vec3::Zero(), Vec3(2, 2, 2)}, {true, false, true}, 1.0);
    const Vec3Series out = interpolate_gaps(g, Interpolation::linear);
    EXPECT_EQ(out[1], Vec3(1, 1, 1));
}

TEST(Interpolate, NoGapsIsIdentity) {
    const Vec3Series p{Vec3(1, 0, 0), Vec3(3, 1, 0), Vec3(-2, 5, 1)};
    EXPECT_EQ(interpolate_gaps(gapped(p, {true, true, true}, 10.0), Interpolation::cubic), p);
}

TEST(Interpolate, CubicRecoversCubicPolynomial) {
    const double rate = 10.0;
    Vec3Series p;
    for (int i = 0; i < 8; ++i) {
        const double t = i / rate;
        p.emplace_back(t * t * t, 2.0 - t * t * t, 0.5 * t * t * t + t);
    }
    const std::vector<bool> keep{true, true, false, false, true, true, true, true};
    const Vec3Series out = interpolate_gaps(gapped(p, keep, rate), Interpolation::cubic);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE((out[i] - p[i]).cwiseAbs().maxCoeff(), 1e-9) << i;
}

TEST(Interpolate, CubicThroughFourSamples) {
    Vec3Series p;
    for (int i = 0; i < 5; ++i) p.emplace_back(std::pow(i, 3), 0, 0);
    const Vec3Series out = interpolate_gaps(gapped(p, {true, true, false, true, true}, 1.0), Interpolation::cubic);
    EXPECT_NEAR(out[2].x(), 8.0, 1e-9);
}

TEST(Interpolate, EdgesTakeNearestValue) {
    const Vec3Series p{Vec3(9, 9, 9), Vec3(1, 1, 1), Vec3(3, 3, 3), Vec3(9, 9, 9)};
    const Vec3Series out = interpolate_gaps(gapped(p, {false, true, true, false}, 1.0), Interpolation::cubic);
    EXPECT_EQ(out[0], Vec3(1, 1, 1));
    EXPECT_EQ(out[3], Vec3(3, 3, 3));
}

TEST(Interpolate, AutomaticUsesLinearForLongGaps) {
    // Quadratic data, 1 s gap at 10 Hz: linear fills a chord, cubic would be exact.
    Vec3Series p;
    for (int i = 0; i < 30; ++i) p.emplace_back(0.01 * i * i, 0, 0);
    std::vector<bool> keep(30, true);
    for (int i = 10; i < 20; ++i) keep[i] = false;
    const Vec3Series a = interpolate_gaps(gapped(p, keep, 10.0), Interpolation::automatic);
    const Vec3Series l = interpolate_gaps(gapped(p, keep, 10.0), Interpolation::linear);
    EXPECT_EQ(a, l);
    keep.assign(30, true);
    keep[15] = false;
    const Vec3Series c = interpolate_gaps(gapped(p, keep, 10.0), Interpolation::automatic);
    EXPECT_NEAR(c[15].x(), p[15].x(), 1e-12);
}

TEST(Interpolate, TooFewSamples) {
    EXPECT_THROW(interpolate_gaps(gapped({Vec3(1, 1, 1), Vec3::Zero()}, {true, false}, 1.0), Interpolation::linear),
                 ConfigError);
}

TEST(Kalman, ConstantIsFixedPoint) {
    const Vec3Series p(100, Vec3(1.5, -2.0, 0.25));
    for (double q : {0.01, 1.0, 100.0}) {
        const Vec3Series out = kalman_smooth(p, 100.0, {q, 0.5, 3.0});
        ASSERT_EQ(out.size(), p.size());
        for (const auto& v : out) EXPECT_LE((v - p[0]).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Kalman, LineIsReproduced) {
    const Vec3Series p = line(200, 50.0, Vec3(0.3, -1, 2), Vec3(0.5, 1.2, -0.7));
    const Vec3Series out = kalman_smooth(p, 50.0);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE((out[i] - p[i]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Kalman, ReducesNoiseOnAverage) {
    const Vec3Series truth = line(500, 100.0, Vec3(0, 1, 0), Vec3(1.0, -0.5, 0.2));
    double raw_total = 0.0, smooth_total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.05);
        Vec3Series noisy = truth;
        for (auto& v : noisy) v += Vec3(noise(rng), noise(rng), noise(rng));
        raw_total += rmse_to(noisy, truth);
        smooth_total += rmse_to(kalman_smooth(noisy, 100.0), truth);
    }
    EXPECT_LT(smooth_total / 100.0, raw_total / 100.0);
}

TEST(Kalman, TranslationEquivariant) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    Vec3Series p;
    for (int i = 0; i < 64; ++i) p.emplace_back(n(rng), n(rng), n(rng));
    const Vec3 c(3.0, -7.0, 0.5);
    Vec3Series shifted = p;
    for (auto& v : shifted) v += c;
    const Vec3Series a = kalman_smooth(p, 60.0);
    const Vec3Series b = kalman_smooth(shifted, 60.0);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE((b[i] - a[i] - c).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Kalman, RejectsBadParams) {
    const Vec3Series p(10, Vec3::Zero());
    EXPECT_THROW(kalman_smooth(p, 100.0, {0.0, 1.0, 1.0}), ConfigError);
    EXPECT_THROW(kalman_smooth(p, 100.0, {1.0, -1.0, 1.0}), ConfigError);
    EXPECT_THROW(kalman_smooth(p, 100.0, {1.0, 1.0, 0.0}), ConfigError);
    EXPECT_THROW(kalman_smooth(Vec3Series(1, Vec3::Zero()), 100.0), ConfigError);
}

TEST(Scale, FactorFromLengths) {
    const Vec3Series p{Vec3(1, 2, 3)};
    EXPECT_EQ(resolve_scale(p, 1.8, 0.6)[0], Vec3(3, 6, 9));
    EXPECT_EQ(resolve_scale(p, 0.6, 0.6)[0], p[0]);
    EXPECT_THROW(resolve_scale(p, 1.0, 0.0), ConfigError);
    EXPECT_THROW(resolve_scale(p, -1.0, 1.0), ConfigError);
}

TEST(Scale, ComposesMultiplicatively) {
    const Vec3Series p{Vec3(0.123, -4.5, 6.75), Vec3(1e-3, 2e3, -0.5)};
    const Vec3Series twice = resolve_scale(resolve_scale(p, 1.3, 0.7), 2.2, 0.9);
    const Vec3Series once = resolve_scale(p, (1.3 / 0.7) * (2.2 / 0.9), 1.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        EXPECT_LE((twice[i] - once[i]).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, once[i].norm()));
}

TEST(Scale, CommutesWithInterpolation) {
    Vec3Series p;
    for (int i = 0; i < 20; ++i) p.emplace_back(std::sin(0.3 * i), std::cos(0.2 * i), 0.1 * i);
    std::vector<bool> keep(20, true);
    keep[3] = keep[4] = keep[11] = keep[19] = false;
    for (auto method : {Interpolation::linear, Interpolation::cubic}) {
        const Vec3Series a = resolve_scale(interpolate_gaps(gapped(p, keep, 30.0), method), 1.8, 0.6);
        const Vec3Series b = interpolate_gaps(gapped(resolve_scale(p, 1.8, 0.6), keep, 30.0), method);
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE((a[i] - b[i]).cwiseAbs().maxCoeff(), 1e-12);
    }
}

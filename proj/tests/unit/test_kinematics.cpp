#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "vimu/error.hpp"
#include "vimu/kinematics.hpp"

using namespace vimu;
using namespace vimu::kinematics;
using vimu::testing::random_rotation;
using vimu::testing::random_vec;
using vimu::testing::rigid_patch;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3Series sample(std::size_t n, double rate, const std::function<Vec3(double)>& f) {
    Vec3Series out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(static_cast<double>(i) / rate));
    return out;
}

// Error of a stencil estimate of d2/dt2 sin(t) at t = 1 for the given rate.
template <typename T, typename Stencil>
T sin_error(Stencil stencil, int rate) {
    // Samples t = 1 + k/rate, k = -4..4, so index 4 is t = 1.
    std::vector<T> x;
    for (int k = -4; k <= 4; ++k) x.push_back(std::sin(T(1) + T(k) / T(rate)));
    const std::vector<T> d = stencil(std::span<const T>(x), T(rate));
    return std::abs(d[4] + std::sin(T(1)));
}

Mat3 axis_rotation(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

}  // namespace

TEST(CentralStencil, ExactOnQuadratic) {
    const Vec3Series x = sample(50, 100.0, [](double t) { return Vec3(3 * t * t, 3 * t * t, 3 * t * t); });
    const Derivative d = central_second_derivative(x, 100.0);
    for (const auto& v : d.values) EXPECT_NEAR((v - Vec3(6, 6, 6)).cwiseAbs().maxCoeff(), 0.0, 1e-6);
    EXPECT_TRUE(d.boundary.front());
    EXPECT_TRUE(d.boundary.back());
    EXPECT_FALSE(d.boundary[1]);
}

TEST(CentralStencil, ConstantGivesZero) {
    const Derivative d = central_second_derivative(Vec3Series(10, Vec3(4, 5, 6)), 100.0);
    for (const auto& v : d.values) EXPECT_EQ(v, Vec3::Zero());
}

TEST(CentralStencil, ErrorQuartersWhenRateDoubles) {
    auto stencil = [](std::span<const double> x, double r) { return central_second_derivative(x, r); };
    const double ratio = sin_error<double>(stencil, 100) / sin_error<double>(stencil, 200);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(CentralStencil, TooShort) {
    EXPECT_THROW(central_second_derivative(Vec3Series(2, Vec3::Zero()), 10.0), ConfigError);
}

TEST(RichardsonStencil, ExactOnQuartic) {
    const Vec3Series x = sample(60, 100.0, [](double t) { return Vec3(t * t * t * t, 0, -t * t * t * t); });
    const Derivative d = richardson_second_derivative(x, 100.0);
    for (std::size_t i = 2; i + 2 < x.size(); ++i) {
        const double t = static_cast<double>(i) / 100.0;
        EXPECT_NEAR(d.values[i].x(), 12 * t * t, 1e-8) << i;
        EXPECT_NEAR(d.values[i].z(), -12 * t * t, 1e-8) << i;
        EXPECT_FALSE(d.boundary[i]);
    }
    EXPECT_TRUE(d.boundary[0] && d.boundary[1] && d.boundary[58] && d.boundary[59]);
}

TEST(RichardsonStencil, ConstantGivesZero) {
    const Derivative d = richardson_second_derivative(Vec3Series(10, Vec3(4, 5, 6)), 100.0);
    for (const auto& v : d.values) EXPECT_EQ(v, Vec3::Zero());
}

TEST(RichardsonStencil, ErrorDropsSixteenfold) {
    auto stencil = [](std::span<const double> x, double r) { return richardson_second_derivative(x, r); };
    const double ratio = sin_error<double>(stencil, 50) / sin_error<double>(stencil, 100);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(RichardsonStencil, AgreesWithCentralOnQuadratics) {
    const Vec3Series x = sample(20, 10.0, [](double t) { return Vec3(2 * t * t - t + 1, -t * t, 5.0); });
    const Derivative r = richardson_second_derivative(x, 10.0);
    const Derivative c = central_second_derivative(x, 10.0);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE((r.values[i] - c.values[i]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RichardsonStencil, TooShort) {
    EXPECT_THROW(richardson_second_derivative(Vec3Series(4, Vec3::Zero()), 10.0), ConfigError);
}

TEST(Triad, UnitTriangle) {
    const TriangleTriad t = triangle_triad(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    EXPECT_EQ(t.axes.col(2), Vec3(0, 0, 1));
    EXPECT_EQ(t.axes.col(0), Vec3(1, 0, 0));
    EXPECT_NEAR((t.origin - Vec3(1.0 / 3, 1.0 / 3, 0)).norm(), 0.0, 1e-15);
}

TEST(Triad, SwappingVerticesFlipsNormal) {
    const Vec3 a(0.1, 0.2, 0.3), b(1.0, -0.5, 0.2), c(-0.4, 0.9, 1.1);
    const TriangleTriad t1 = triangle_triad(a, b, c);
    const TriangleTriad t2 = triangle_triad(a, c, b);
    EXPECT_NEAR((t1.axes.col(2) + t2.axes.col(2)).norm(), 0.0, 1e-12);
}

TEST(Triad, RandomTrianglesAreOrthonormal) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const Vec3 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng);
        const TriangleTriad t = triangle_triad(a, b, c);
        EXPECT_LE((t.axes.transpose() * t.axes - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(t.axes.determinant(), 1.0, 1e-12);
        EXPECT_LE((t.axes.col(2) - (b - a).cross(c - a).normalized()).norm(), 1e-12);
    }
}

TEST(Triad, DegenerateRejected) {
    EXPECT_THROW(triangle_triad(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)), ConfigError);
}

TEST(AngularVelocity, StaticIsZero) {
    const RotationSeries r(10, axis_rotation(Vec3(1, 2, 3), 0.4));
    for (const auto& w : angular_velocity(r, 100.0)) EXPECT_LE(w.norm(), 1e-15);
}

TEST(AngularVelocity, SpinAboutZ) {
    const double rate = 100.0;
    std::vector<TriangleTriad> triads;
    for (int i = 0; i < 50; ++i) {
        const Mat3 r = vimu::testing::rot_z(0.5 * i / rate);
        triads.push_back(triangle_triad(r * Vec3(0, 0, 0), r * Vec3(1, 0, 0), r * Vec3(0, 1, 0)));
    }
    for (const auto& w : angular_velocity(triads, rate)) EXPECT_LE((w - Vec3(0, 0, 0.5)).norm(), 1e-6);
}

TEST(AngularVelocity, SpinAboutDiagonal) {
    const double rate = 100.0;
    const Vec3 axis = Vec3(1, 1, 1).normalized();
    RotationSeries r;
    for (int i = 0; i < 50; ++i) r.push_back(axis_rotation(axis, 2.0 * i / rate));
    for (const auto& w : angular_velocity(r, rate)) {
        // Quaternion-log oracle for the same step.
        const Quat step(axis_rotation(axis, 2.0 / rate));
        const Vec3 oracle = 2.0 * std::atan2(step.vec().norm(), step.w()) * step.vec().normalized() * rate;
        EXPECT_LE((w - oracle).norm(), 1e-9);
        EXPECT_NEAR(w.norm(), 2.0, 1e-5);
        EXPECT_LE((w.normalized() - axis).norm(), 1e-5);
    }
}

TEST(AngularVelocity, LeftInvariant) {
    std::mt19937_64 rng(2);
    RotationSeries r;
    Mat3 cur = random_rotation(rng);
    for (int i = 0; i < 30; ++i) {
        cur = axis_rotation(random_vec(rng), 0.05) * cur;
        r.push_back(cur);
    }
    const Mat3 q = random_rotation(rng);
    RotationSeries rq;
    for (const auto& m : r) rq.push_back(q * m);
    const Vec3Series w = angular_velocity(r, 60.0);
    const Vec3Series wq = angular_velocity(rq, 60.0);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LE((wq[i] - q * w[i]).norm(), 1e-9);
}

TEST(AngularVelocity, AliasedStepReportsFrame) {
    RotationSeries r{Mat3::Identity(), Mat3::Identity(), vimu::testing::rot_z(kPi)};
    try {
        angular_velocity(r, 10.0);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("frames 1 and 2"), std::string::npos) << e.what();
    }
}

TEST(RegionMotion, StaticPatch) {
    const MotionTrackSet set = rigid_patch([](double) { return Vec3(0.3, 1.0, 0.2); },
                                           [](double) { return axis_rotation(Vec3(0, 1, 1), 0.3); }, 100.0, 40);
    const GlobalMotion m = region_motion(set, "wrist");
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_LE(m.accel[i].norm(), 1e-9);
        EXPECT_LE(m.gyro[i].norm(), 1e-12);
    }
}

TEST(RegionMotion, RigidTranslation) {
    const MotionTrackSet set = rigid_patch([](double t) { return Vec3(0.5 * t * t, 0, 0); },
                                           [](double) { return Mat3::Identity(); }, 100.0, 60);
    const GlobalMotion m = region_motion(set, "wrist");
    for (std::size_t i = 0; i < 60; ++i) {
        EXPECT_LE((m.accel[i] - Vec3(1, 0, 0)).norm(), 1e-6);
        EXPECT_LE(m.gyro[i].norm(), 1e-12);
    }
}

TEST(RegionMotion, CircularOrbit) {
    const double w = 2 * kPi;
    const MotionTrackSet set = rigid_patch([w](double t) { return Vec3(std::cos(w * t), std::sin(w * t), 0); },
                                           [w](double t) { return vimu::testing::rot_z(w * t); }, 100.0, 300);
    const GlobalMotion m = region_motion(set, "wrist");
    // The patch centroid sits slightly off the orbit radius, so compare to its own radius.
    Vec3 centroid = Vec3::Zero();
    for (const auto& v : vimu::testing::patch_vertices()) centroid += v;
    const double radius = (Vec3(1, 0, 0) + centroid / 9.0).norm();
    for (std::size_t i = 2; i + 2 < 300; ++i) {
        EXPECT_NEAR(m.accel[i].norm(), w * w * radius, 0.005 * w * w * radius);
        EXPECT_LE((m.gyro[i] - Vec3(0, 0, w)).norm(), 1e-4);
    }
}

TEST(RegionMotion, UnknownRegion) {
    const MotionTrackSet set = rigid_patch([](double) { return Vec3::Zero(); },
                                           [](double) { return Mat3::Identity(); }, 100.0, 10);
    EXPECT_THROW(region_motion(set, "ankle"), ConfigError);
}

TEST(SensorFrame, StationaryIdentity) {
    SensorSpec spec;
    spec.sample_rate = 100.0;
    const ImuSeries s = to_sensor_frame(Vec3Series(5, Vec3::Zero()), Vec3Series(5, Vec3::Zero()),
                                        RotationSeries(5, Mat3::Identity()), spec);
    EXPECT_EQ(s.frame, FrameTag::sensor);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(s.accel[i], Vec3(0, 0, 9.80665));
        EXPECT_EQ(s.gyro[i], Vec3::Zero());
    }
    const ImuSeries g = from_sensor_frame(s, RotationSeries(5, Mat3::Identity()), spec);
    for (const auto& a : g.accel) EXPECT_EQ(a, Vec3::Zero());
}

TEST(SensorFrame, BoneRotationAboutZ) {
    SensorSpec spec;
    spec.sample_rate = 100.0;
    const ImuSeries s = to_sensor_frame(Vec3Series{Vec3::Zero()}, Vec3Series{Vec3(1, 0, 0)},
                                        RotationSeries{vimu::testing::rot_z(kPi / 2)}, spec);
    EXPECT_LE((s.gyro[0] - Vec3(0, -1, 0)).norm(), 1e-15);
}

TEST(SensorFrame, IdentityRotationsAddGravityExactly) {
    std::mt19937_64 rng(6);
    SensorSpec spec;
    spec.gravity = Vec3(0.1, -9.8, 0.3);
    spec.sample_rate = 50.0;
    Vec3Series a, w;
    for (int i = 0; i < 20; ++i) {
        a.push_back(random_vec(rng, 10));
        w.push_back(random_vec(rng, 3));
    }
    const ImuSeries s = to_sensor_frame(a, w, RotationSeries(20, Mat3::Identity()), spec);
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(s.accel[i], a[i] + spec.gravity);
        EXPECT_EQ(s.gyro[i], w[i]);
    }
}

TEST(SensorFrame, RoundTripAndNormPreservation) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        SensorSpec spec;
        spec.sensor_to_bone = random_rotation(rng);
        spec.sample_rate = 60.0;
        Vec3Series a, w;
        RotationSeries r;
        for (int i = 0; i < 100; ++i) {
            a.push_back(random_vec(rng, 20));
            w.push_back(random_vec(rng, 5));
            r.push_back(random_rotation(rng));
        }
        const ImuSeries s = to_sensor_frame(a, w, r, spec);
        const ImuSeries g = from_sensor_frame(s, r, spec);
        EXPECT_EQ(g.frame, FrameTag::global);
        for (int i = 0; i < 100; ++i) {
            EXPECT_LE((g.accel[i] - a[i]).cwiseAbs().maxCoeff(), 1e-12 * 32);
            EXPECT_LE((g.gyro[i] - w[i]).cwiseAbs().maxCoeff(), 1e-12 * 8);
            EXPECT_NEAR(s.gyro[i].norm(), w[i].norm(), 1e-12 * 8);
        }
    }
}

TEST(SensorFrame, LengthMismatch) {
    SensorSpec spec;
    spec.sample_rate = 100.0;
    EXPECT_THROW(to_sensor_frame(Vec3Series(3, Vec3::Zero()), Vec3Series(2, Vec3::Zero()),
                                 RotationSeries(3, Mat3::Identity()), spec),
                 ConfigError);
    EXPECT_THROW(to_sensor_frame(Vec3Series(3, Vec3::Zero()), Vec3Series(3, Vec3::Zero()),
                                 RotationSeries(2, Mat3::Identity()), spec),
                 ConfigError);
}

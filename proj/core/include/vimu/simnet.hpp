#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vimu/error.hpp"
#include "vimu/types.hpp"
#include "vimu/windowing.hpp"

namespace vimu::simnet {

using Matrix = Eigen::MatrixXd;  // rows are frames
using Vector = Eigen::VectorXd;

inline constexpr int kWeightFormatVersion = 1;

enum class Target { accel, gyro };
const char* to_string(Target t);
Target target_from_string(const std::string& text);

/// Conv x3 (ReLU, same padding, stride 1) -> bidirectional LSTM x2 -> linear
/// head with 3 outputs per frame. The layer counts are fixed; sizes are not.
struct NetworkConfig {
    // 27 = 3 triangles x 3 vertices x 3 coordinates. With `append_orientation`
    // the region's bone quaternion (w,x,y,z) is appended, giving 31.
    bool append_orientation = false;
    std::array<int, 3> conv_channels{64, 64, 64};
    int kernel = 5;
    std::array<int, 2> lstm_hidden{128, 128};

    static constexpr int kOutputDim = 3;

    int input_dim() const { return append_orientation ? 31 : 27; }
    void validate() const;
    bool operator==(const NetworkConfig&) const = default;
};

struct TrainConfig {
    double window_seconds = 2.0;
    double overlap = 0.8;
    std::size_t batch_size = 8;
    std::size_t epochs = 50;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    NetworkConfig network;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// One named tensor inside the flat parameter vector. Values are stored
/// row-major (last index fastest).
struct ParameterInfo {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

std::vector<ParameterInfo> parameter_layout(const NetworkConfig& config);
std::size_t parameter_count(const NetworkConfig& config);

struct WeightBundle {
    int version = kWeightFormatVersion;
    Target target = Target::accel;
    NetworkConfig config;
    std::uint64_t seed = 0;
    Vector params;
    // Per-channel input standardization applied before the network.
    Vector input_mean;
    Vector input_std;
    std::optional<TrainConfig> trained_with;

    std::vector<ParameterInfo> layout() const { return parameter_layout(config); }
    ParameterInfo info(const std::string& name) const;
    Eigen::Map<Vector> slice(const std::string& name);
    Eigen::Map<const Vector> slice(const std::string& name) const;

    // Throws ConfigError on shape mismatch, NumericalError on non-finite values.
    void validate() const;
};

// Uniform fan-in initialization from a seeded 64-bit Mersenne Twister;
// LSTM forget-gate biases start at 1. Standardization defaults to identity.
WeightBundle init_weights(const NetworkConfig& config, std::uint64_t seed, Target target = Target::accel);

// Manifest `<stem>.json` plus little-endian float64 blob `<stem>.bin`:
// parameters in manifest order, then input mean, then input std.
void save_weights(const WeightBundle& weights, const std::string& stem);
WeightBundle load_weights(const std::string& path);

/// Network output (frames x 3) for one standardized input window (frames x D).
Matrix forward(const WeightBundle& weights, const Matrix& input);

// Output of the second biLSTM layer (frames x 2H): the features the linear head sees.
Matrix forward_features(const WeightBundle& weights, const Matrix& input);

struct LossGradient {
    double loss = 0.0;
    Vector gradient;  // same layout as WeightBundle::params
};

/// Mean squared error over every window, frame and output axis, and its
/// gradient by backpropagation through time.
LossGradient loss_and_gradient(const WeightBundle& weights, std::span<const Matrix> inputs,
                               std::span<const Matrix> targets);

// Raw per-frame network input for a region: frames x input_dim.
Matrix region_input(const MotionTrackSet& set, const std::string& region, bool append_orientation);

struct WindowSet {
    Target target = Target::accel;
    double sample_rate = 0.0;
    std::size_t window_length = 0;
    std::size_t hop = 0;
    std::vector<Matrix> inputs;   // standardized, window_length x D
    std::vector<Matrix> targets;  // global frame, window_length x 3
    std::vector<std::size_t> offsets;
    Vector input_mean;
    Vector input_std;
};

using vimu::window_count;
using vimu::window_hop;
using vimu::window_length;

struct TrainingRecord {
    const MotionTrackSet* tracks = nullptr;
    std::string region;
    const ImuSeries* targets = nullptr;  // global frame
};

/// Slices records into fixed-length windows. Standardization statistics
/// are pooled over every frame of every record; channels with zero spread get
/// a unit scale so they are only centred.
WindowSet build_windows(std::span<const TrainingRecord> records, const TrainConfig& config, Target target);
WindowSet build_windows(const MotionTrackSet& set, const std::string& region, const ImuSeries& targets,
                        const TrainConfig& config, Target target);

// Aborted training: the loss became non-finite.
class TrainingDiverged : public NumericalError {
public:
    TrainingDiverged(const std::string& what, std::vector<double> history)
        : NumericalError(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

struct TrainResult {
    WeightBundle weights;
    std::vector<double> loss_history;  // mean batch loss per epoch
};

/// Mini-batch Adam on the MSE. Bitwise reproducible for a given seed.
TrainResult train(const WindowSet& windows, const TrainConfig& config);

/// Start frames covering [0, n): every hop, plus one right-aligned window
/// when the last regular window stops short of the end.
std::vector<std::size_t> stitch_starts(std::size_t n, std::size_t length, std::size_t hop);

// Uniform average of overlapping per-window predictions.
Matrix stitch(std::span<const Matrix> predictions, std::span<const std::size_t> starts, std::size_t n);

/// Global-frame prediction for a whole track: overlapping windows predicted
/// independently and averaged.
Vec3Series predict_series(const WeightBundle& weights, const MotionTrackSet& set, const std::string& region,
                          const TrainConfig& config);

// Accelerometer and gyroscope networks combined into one global-frame series.
ImuSeries predict_imu(const WeightBundle& accel, const WeightBundle& gyro, const MotionTrackSet& set,
                      const std::string& region, const TrainConfig& config);

}  // namespace vimu::simnet

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vimu/types.hpp"

namespace vimu::post {

// N samples x C channels.
using Channels = Eigen::MatrixXd;

inline const std::vector<std::string> kImuChannelNames = {"ax", "ay", "az", "gx", "gy", "gz"};

Channels to_channels(const ImuSeries& series);
ImuSeries from_channels(const Channels& data, FrameTag frame, double sample_rate);

/// Rank-based distribution mapping. Sample i of `sim` is replaced by the
/// empirical quantile of `reference` at rank(sim[i]) / (N + 1), ties getting
/// their average rank. Quantiles interpolate linearly between reference
/// order statistics placed at k / (M + 1), clamped to the extremes.
std::vector<double> distribution_map(std::span<const double> sim, std::span<const double> reference);

// Which samples share one mapping.
enum class MapScope {
    recording,  // each channel of each recording separately
    channel,    // each channel, pooled across recordings
    global,     // all accelerometer axes pooled, all gyroscope axes pooled
};
MapScope map_scope_from_string(const std::string& text);
const char* to_string(MapScope scope);

/// Applies distribution_map over a set of recordings with 6 IMU channels
/// according to `scope`. The reference is pooled the same way.
std::vector<Channels> map_recordings(const std::vector<Channels>& sims, const std::vector<Channels>& references,
                                     MapScope scope);

inline constexpr double kDefaultCutoffHz = 10.0;

/// 4th-order Butterworth low-pass as two cascaded biquads (bilinear
/// transform with prewarping), transposed direct form II.
class ButterworthLowpass {
public:
    ButterworthLowpass(double cutoff_hz, double sample_rate);

    // Causal single pass, state initialised to the steady state of x[0].
    std::vector<double> filter(std::span<const double> x) const;
    // Forward-backward zero-phase pass over an odd extension of the ends.
    std::vector<double> filtfilt(std::span<const double> x) const;

    struct Section {
        double b0, b1, b2, a1, a2;
    };
    const std::array<Section, 2>& sections() const { return sections_; }

private:
    std::vector<double> run(std::span<const double> x) const;
    std::array<Section, 2> sections_{};
};

// Zero-phase low-pass of every channel. Throws ConfigError unless 0 < cutoff < rate / 2.
Channels lowpass(const Channels& data, double cutoff_hz, double sample_rate);

struct NormStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;            // standard deviation, 1 where zero_variance
    std::vector<bool> zero_variance;  // constant channels are only centred

    bool any_zero_variance() const;
};

struct Normalized {
    Channels data;
    NormStats stats;
};

// Per-channel z-score with population standard deviation.
Normalized normalize(const Channels& data);
Channels denormalize(const Channels& data, const NormStats& stats);

struct WindowList {
    std::size_t length = 0;
    std::size_t hop = 0;
    std::vector<std::size_t> starts;
    std::vector<Channels> windows;
};

WindowList har_windows(const Channels& data, double sample_rate, double window_seconds = 1.0, double overlap = 0.5);

// Majority label inside each window; ties go to the smallest label.
std::vector<int> window_labels(const std::vector<int>& labels, const WindowList& windows);

struct HarExportMeta {
    double sample_rate = 0.0;
    double window_seconds = 1.0;
    double overlap = 0.5;
    std::size_t window_length = 0;
    std::size_t hop = 0;
    std::string subject;
    std::vector<std::string> channel_names = kImuChannelNames;
    double lowpass_cutoff_hz = kDefaultCutoffHz;
    std::string distribution_mapping;  // "skipped" or the scope used
    std::vector<NormStats> normalization;
};

/// Writes `X.csv` (one flattened window per row, frame-major), `y.csv` (one
/// label per row) and `meta.json` into `dir`, creating it if needed.
void write_har_export(const std::string& dir, const std::vector<Channels>& windows, const std::vector<int>& labels,
                      const HarExportMeta& meta);

}  // namespace vimu::post

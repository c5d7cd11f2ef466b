#include <cmath>
#include <numeric>
#include <random>

#include "vimu/simnet.hpp"

namespace vimu::simnet {

void TrainConfig::validate() const {
    if (!(window_seconds > 0.0)) throw ConfigError("window length must be positive");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
    if (batch_size == 0) throw ConfigError("batch size must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
    network.validate();
}

Matrix region_input(const MotionTrackSet& set, const std::string& name, bool append_orientation) {
    const Region& region = set.region(name);
    const auto n = static_cast<Eigen::Index>(set.frame_count);
    Matrix x(n, append_orientation ? 31 : 27);
    const auto ids = region.vertex_ids();
    for (std::size_t v = 0; v < ids.size(); ++v) {
        const Vec3Series& track = set.vertices.at(ids[v]);
        for (Eigen::Index f = 0; f < n; ++f) {
            x.block<1, 3>(f, static_cast<Eigen::Index>(3 * v)) = track[static_cast<std::size_t>(f)].transpose();
        }
    }
    if (append_orientation) {
        for (Eigen::Index f = 0; f < n; ++f) {
            const Quat& q = region.orientation[static_cast<std::size_t>(f)];
            x(f, 27) = q.w();
            x(f, 28) = q.x();
            x(f, 29) = q.y();
            x(f, 30) = q.z();
        }
    }
    return x;
}

namespace {

Matrix target_matrix(const ImuSeries& s, Target target) {
    const Vec3Series& src = target == Target::accel ? s.accel : s.gyro;
    Matrix y(static_cast<Eigen::Index>(src.size()), 3);
    for (std::size_t i = 0; i < src.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = src[i].transpose();
    return y;
}

Matrix standardize(const Matrix& x, const Vector& mean, const Vector& std) {
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

}  // namespace

WindowSet build_windows(std::span<const TrainingRecord> records, const TrainConfig& config, Target target) {
    config.validate();
    if (records.empty()) throw ConfigError("build_windows needs at least one record");

    WindowSet out;
    out.target = target;
    out.sample_rate = records.front().tracks->sample_rate;
    out.window_length = window_length(config.window_seconds, out.sample_rate);
    out.hop = window_hop(out.window_length, config.overlap);

    std::vector<Matrix> raw_inputs;
    std::vector<Matrix> raw_targets;
    for (const auto& rec : records) {
        const MotionTrackSet& set = *rec.tracks;
        const ImuSeries& targets = *rec.targets;
        if (std::abs(set.sample_rate - out.sample_rate) > 1e-9 * out.sample_rate ||
            std::abs(targets.sample_rate - set.sample_rate) > 1e-9 * set.sample_rate) {
            throw ConfigError("track and target sample rates differ");
        }
        if (targets.frame != FrameTag::global) throw ConfigError("training targets must be in the global frame");
        if (targets.size() != set.frame_count) {
            throw ConfigError("region '" + rec.region + "': " + std::to_string(set.frame_count) + " track frames but " +
                              std::to_string(targets.size()) + " target samples");
        }
        if (set.frame_count < out.window_length) {
            throw ConfigError("record with " + std::to_string(set.frame_count) + " frames is shorter than one window (" +
                              std::to_string(out.window_length) + ")");
        }
        raw_inputs.push_back(region_input(set, rec.region, config.network.append_orientation));
        raw_targets.push_back(target_matrix(targets, target));
    }

    const Eigen::Index dim = raw_inputs.front().cols();
    Vector sum = Vector::Zero(dim);
    double frames = 0.0;
    for (const Matrix& x : raw_inputs) {
        sum += x.colwise().sum().transpose();
        frames += static_cast<double>(x.rows());
    }
    out.input_mean = sum / frames;
    Vector sq = Vector::Zero(dim);
    for (const Matrix& x : raw_inputs) sq += (x.rowwise() - out.input_mean.transpose()).colwise().squaredNorm().transpose();
    out.input_std = (sq / frames).cwiseSqrt();
    for (Eigen::Index c = 0; c < dim; ++c)
        if (!(out.input_std[c] > 1e-12)) out.input_std[c] = 1.0;

    const auto L = static_cast<Eigen::Index>(out.window_length);
    for (std::size_t r = 0; r < raw_inputs.size(); ++r) {
        const Matrix x = standardize(raw_inputs[r], out.input_mean, out.input_std);
        const std::size_t count = window_count(static_cast<std::size_t>(x.rows()), out.window_length, out.hop);
        for (std::size_t w = 0; w < count; ++w) {
            const auto start = static_cast<Eigen::Index>(w * out.hop);
            out.inputs.push_back(x.middleRows(start, L));
            out.targets.push_back(raw_targets[r].middleRows(start, L));
            out.offsets.push_back(w * out.hop);
        }
    }
    return out;
}

WindowSet build_windows(const MotionTrackSet& set, const std::string& region, const ImuSeries& targets,
                        const TrainConfig& config, Target target) {
    const TrainingRecord record{&set, region, &targets};
    return build_windows(std::span<const TrainingRecord>(&record, 1), config, target);
}

TrainResult train(const WindowSet& windows, const TrainConfig& config) {
    config.validate();
    if (windows.inputs.empty()) throw ConfigError("training needs at least one window");

    TrainResult result;
    result.weights = init_weights(config.network, config.seed, windows.target);
    result.weights.input_mean = windows.input_mean;
    result.weights.input_std = windows.input_std;
    result.weights.trained_with = config;

    WeightBundle& w = result.weights;
    const Eigen::Index n_params = w.params.size();
    Vector m = Vector::Zero(n_params);
    Vector v = Vector::Zero(n_params);
    std::uint64_t step = 0;

    // Shuffling draws from its own stream so that it does not depend on init.
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(windows.inputs.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<Matrix> batch_in;
    std::vector<Matrix> batch_out;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_in.clear();
            batch_out.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch_in.push_back(windows.inputs[order[k]]);
                batch_out.push_back(windows.targets[order[k]]);
            }
            LossGradient lg;
            try {
                lg = loss_and_gradient(w, batch_in, batch_out);
            } catch (const NumericalError& e) {
                throw TrainingDiverged(std::string("training diverged in epoch ") + std::to_string(epoch + 1) +
                                           ": " + e.what(),
                                       result.loss_history);
            }
            epoch_loss += lg.loss * static_cast<double>(end - start);

            ++step;
            m = config.beta1 * m + (1.0 - config.beta1) * lg.gradient;
            v = config.beta2 * v + (1.0 - config.beta2) * lg.gradient.cwiseAbs2();
            const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            w.params.array() -= config.learning_rate * (m.array() / correction1) /
                                ((v.array() / correction2).sqrt() + config.epsilon);
        }
        epoch_loss /= static_cast<double>(order.size());
        result.loss_history.push_back(epoch_loss);
        if (!std::isfinite(epoch_loss) || !w.params.allFinite()) {
            throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch + 1), result.loss_history);
        }
    }
    return result;
}

std::vector<std::size_t> stitch_starts(std::size_t n, std::size_t length, std::size_t hop) {
    if (n < length) throw ConfigError("track of " + std::to_string(n) + " frames is shorter than one window");
    std::vector<std::size_t> starts;
    const std::size_t count = window_count(n, length, hop);
    for (std::size_t w = 0; w < count; ++w) starts.push_back(w * hop);
    if (starts.back() + length < n) starts.push_back(n - length);
    return starts;
}

Matrix stitch(std::span<const Matrix> predictions, std::span<const std::size_t> starts, std::size_t n) {
    if (predictions.size() != starts.size() || predictions.empty()) {
        throw ConfigError("stitch needs one start per prediction");
    }
    const Eigen::Index cols = predictions.front().cols();
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(n), cols);
    Vector weight = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t w = 0; w < predictions.size(); ++w) {
        const auto start = static_cast<Eigen::Index>(starts[w]);
        const Eigen::Index rows = predictions[w].rows();
        if (start + rows > static_cast<Eigen::Index>(n)) throw ConfigError("window extends past the series end");
        sum.middleRows(start, rows) += predictions[w];
        weight.segment(start, rows).array() += 1.0;
    }
    for (Eigen::Index t = 0; t < sum.rows(); ++t) {
        if (weight[t] == 0.0) throw ConfigError("frame " + std::to_string(t) + " is not covered by any window");
        sum.row(t) /= weight[t];
    }
    return sum;
}

Vec3Series predict_series(const WeightBundle& weights, const MotionTrackSet& set, const std::string& region,
                          const TrainConfig& config) {
    weights.validate();
    const std::size_t L = window_length(config.window_seconds, set.sample_rate);
    const std::size_t hop = window_hop(L, config.overlap);
    const std::size_t n = set.frame_count;
    if (n < L) {
        throw ConfigError("track of " + std::to_string(n) + " frames is shorter than one window (" + std::to_string(L) + ")");
    }
    const Matrix x = standardize(region_input(set, region, weights.config.append_orientation), weights.input_mean,
                                 weights.input_std);
    const std::vector<std::size_t> starts = stitch_starts(n, L, hop);
    std::vector<Matrix> predictions;
    predictions.reserve(starts.size());
    for (std::size_t s : starts) {
        predictions.push_back(forward(weights, x.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(L))));
    }
    const Matrix y = stitch(predictions, starts, n);
    Vec3Series out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = y.row(static_cast<Eigen::Index>(t)).transpose();
    return out;
}

ImuSeries predict_imu(const WeightBundle& accel, const WeightBundle& gyro, const MotionTrackSet& set,
                      const std::string& region, const TrainConfig& config) {
    if (accel.target != Target::accel || gyro.target != Target::gyro) {
        throw ConfigError("predict_imu expects an accel network and a gyro network");
    }
    ImuSeries out;
    out.frame = FrameTag::global;
    out.sample_rate = set.sample_rate;
    out.accel = predict_series(accel, set, region, config);
    out.gyro = predict_series(gyro, set, region, config);
    return out;
}

}  // namespace vimu::simnet

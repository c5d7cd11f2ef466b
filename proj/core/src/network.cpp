#include <cmath>
#include <random>

#include "vimu/simnet.hpp"

namespace vimu::simnet {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Offsets of every tensor in the flat vector, in layout order.
struct Offsets {
    struct Conv {
        std::size_t weight, bias;
        int in, out;
    };
    struct Direction {
        std::size_t w_ih, w_hh, bias;
    };
    struct Lstm {
        Direction fwd, bwd;
        int in, hidden;
    };
    std::array<Conv, 3> conv{};
    std::array<Lstm, 2> lstm{};
    std::size_t head_weight = 0, head_bias = 0;
    int head_in = 0;
    int kernel = 0;
    std::size_t total = 0;

    explicit Offsets(const NetworkConfig& cfg) {
        kernel = cfg.kernel;
        std::size_t at = 0;
        int in = cfg.input_dim();
        for (std::size_t l = 0; l < 3; ++l) {
            int out = cfg.conv_channels[l];
            conv[l] = {at, at + static_cast<std::size_t>(kernel * out * in), in, out};
            at = conv[l].bias + static_cast<std::size_t>(out);
            in = out;
        }
        for (std::size_t l = 0; l < 2; ++l) {
            int h = cfg.lstm_hidden[l];
            auto dir = [&]() {
                Direction d;
                d.w_ih = at;
                d.w_hh = d.w_ih + static_cast<std::size_t>(4 * h * in);
                d.bias = d.w_hh + static_cast<std::size_t>(4 * h * h);
                at = d.bias + static_cast<std::size_t>(4 * h);
                return d;
            };
            lstm[l].fwd = dir();
            lstm[l].bwd = dir();
            lstm[l].in = in;
            lstm[l].hidden = h;
            in = 2 * h;
        }
        head_in = in;
        head_weight = at;
        head_bias = at + static_cast<std::size_t>(NetworkConfig::kOutputDim * in);
        total = head_bias + NetworkConfig::kOutputDim;
    }
};

struct ConvCache {
    Matrix input;
    Matrix pre;
    Matrix out;
};

struct DirectionCache {
    Matrix input;  // time-reversed for the backward direction
    Matrix i, f, g, o, c, tanh_c, h;
};

struct LstmCache {
    DirectionCache fwd, bwd;
    Matrix out;
};

struct Cache {
    std::array<ConvCache, 3> conv;
    std::array<LstmCache, 2> lstm;
    Matrix output;
};

Matrix reversed(const Matrix& m) { return m.colwise().reverse(); }

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

void conv_forward(const Matrix& x, const double* p, const Offsets::Conv& c, int kernel, ConvCache& cache) {
    const Eigen::Index T = x.rows();
    const int pad = (kernel - 1) / 2;
    cache.input = x;
    cache.pre.resize(T, c.out);
    cache.pre.rowwise() = Eigen::Map<const RowVector>(p + c.bias, c.out);
    for (int j = 0; j < kernel; ++j) {
        const Eigen::Index shift = j - pad;
        const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
        const Eigen::Index t1 = std::min<Eigen::Index>(T, T - shift);
        if (t1 <= t0) continue;
        ConstRowMap w(p + c.weight + static_cast<std::size_t>(j * c.out * c.in), c.out, c.in);
        cache.pre.middleRows(t0, t1 - t0).noalias() += x.middleRows(t0 + shift, t1 - t0) * w.transpose();
    }
    cache.out = cache.pre.cwiseMax(0.0);
}

Matrix conv_backward(const ConvCache& cache, const Matrix& d_out, const double* p, double* g,
                     const Offsets::Conv& c, int kernel) {
    const Eigen::Index T = cache.input.rows();
    const int pad = (kernel - 1) / 2;
    Matrix d_pre = (cache.pre.array() > 0.0).select(d_out, 0.0);
    Eigen::Map<RowVector>(g + c.bias, c.out) += d_pre.colwise().sum();
    Matrix d_in = Matrix::Zero(T, c.in);
    for (int j = 0; j < kernel; ++j) {
        const Eigen::Index shift = j - pad;
        const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
        const Eigen::Index t1 = std::min<Eigen::Index>(T, T - shift);
        if (t1 <= t0) continue;
        const std::size_t at = c.weight + static_cast<std::size_t>(j * c.out * c.in);
        ConstRowMap w(p + at, c.out, c.in);
        RowMap gw(g + at, c.out, c.in);
        gw.noalias() += d_pre.middleRows(t0, t1 - t0).transpose() * cache.input.middleRows(t0 + shift, t1 - t0);
        d_in.middleRows(t0 + shift, t1 - t0).noalias() += d_pre.middleRows(t0, t1 - t0) * w;
    }
    return d_in;
}

void direction_forward(const Matrix& x, const double* p, const Offsets::Direction& d, int in, int H,
                       DirectionCache& cache) {
    const Eigen::Index T = x.rows();
    ConstRowMap w_ih(p + d.w_ih, 4 * H, in);
    ConstRowMap w_hh(p + d.w_hh, 4 * H, H);
    Eigen::Map<const RowVector> bias(p + d.bias, 4 * H);

    cache.input = x;
    Matrix z_in = x * w_ih.transpose();
    z_in.rowwise() += bias;
    for (Matrix* m : {&cache.i, &cache.f, &cache.g, &cache.o, &cache.c, &cache.tanh_c, &cache.h}) m->resize(T, H);

    RowVector h_prev = RowVector::Zero(H);
    RowVector c_prev = RowVector::Zero(H);
    for (Eigen::Index t = 0; t < T; ++t) {
        RowVector z = z_in.row(t) + h_prev * w_hh.transpose();
        cache.i.row(t) = sigmoid(z.segment(0, H).array()).matrix();
        cache.f.row(t) = sigmoid(z.segment(H, H).array()).matrix();
        cache.g.row(t) = z.segment(2 * H, H).array().tanh().matrix();
        cache.o.row(t) = sigmoid(z.segment(3 * H, H).array()).matrix();
        cache.c.row(t) = cache.f.row(t).cwiseProduct(c_prev) + cache.i.row(t).cwiseProduct(cache.g.row(t));
        cache.tanh_c.row(t) = cache.c.row(t).array().tanh().matrix();
        cache.h.row(t) = cache.o.row(t).cwiseProduct(cache.tanh_c.row(t));
        h_prev = cache.h.row(t);
        c_prev = cache.c.row(t);
    }
}

Matrix direction_backward(const DirectionCache& cache, const Matrix& d_h, const double* p, double* g,
                          const Offsets::Direction& d, int in, int H) {
    const Eigen::Index T = cache.input.rows();
    ConstRowMap w_ih(p + d.w_ih, 4 * H, in);
    ConstRowMap w_hh(p + d.w_hh, 4 * H, H);

    Matrix d_z(T, 4 * H);
    Eigen::ArrayXXd dh_next = Eigen::ArrayXXd::Zero(1, H);
    Eigen::ArrayXXd dc_next = Eigen::ArrayXXd::Zero(1, H);
    for (Eigen::Index t = T; t-- > 0;) {
        const Eigen::ArrayXXd i = cache.i.row(t).array();
        const Eigen::ArrayXXd f = cache.f.row(t).array();
        const Eigen::ArrayXXd gg = cache.g.row(t).array();
        const Eigen::ArrayXXd o = cache.o.row(t).array();
        const Eigen::ArrayXXd tc = cache.tanh_c.row(t).array();
        const Eigen::ArrayXXd c_prev =
            t > 0 ? Eigen::ArrayXXd(cache.c.row(t - 1).array()) : Eigen::ArrayXXd::Zero(1, H);

        const Eigen::ArrayXXd dh = d_h.row(t).array() + dh_next;
        const Eigen::ArrayXXd d_o = dh * tc;
        const Eigen::ArrayXXd dc = dh * o * (1.0 - tc * tc) + dc_next;
        d_z.row(t).segment(0, H) = (dc * gg * i * (1.0 - i)).matrix();
        d_z.row(t).segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
        d_z.row(t).segment(2 * H, H) = (dc * i * (1.0 - gg * gg)).matrix();
        d_z.row(t).segment(3 * H, H) = (d_o * o * (1.0 - o)).matrix();
        dc_next = dc * f;
        dh_next = (d_z.row(t) * w_hh).array();
    }
    RowMap(g + d.w_ih, 4 * H, in).noalias() += d_z.transpose() * cache.input;
    if (T > 1) {
        RowMap(g + d.w_hh, 4 * H, H).noalias() += d_z.bottomRows(T - 1).transpose() * cache.h.topRows(T - 1);
    }
    Eigen::Map<RowVector>(g + d.bias, 4 * H) += d_z.colwise().sum();
    return d_z * w_ih;
}

void lstm_forward(const Matrix& x, const double* p, const Offsets::Lstm& l, LstmCache& cache) {
    direction_forward(x, p, l.fwd, l.in, l.hidden, cache.fwd);
    direction_forward(reversed(x), p, l.bwd, l.in, l.hidden, cache.bwd);
    cache.out.resize(x.rows(), 2 * l.hidden);
    cache.out.leftCols(l.hidden) = cache.fwd.h;
    cache.out.rightCols(l.hidden) = reversed(cache.bwd.h);
}

Matrix lstm_backward(const LstmCache& cache, const Matrix& d_out, const double* p, double* g,
                     const Offsets::Lstm& l) {
    Matrix d_in = direction_backward(cache.fwd, d_out.leftCols(l.hidden), p, g, l.fwd, l.in, l.hidden);
    d_in += reversed(direction_backward(cache.bwd, reversed(d_out.rightCols(l.hidden)), p, g, l.bwd, l.in,
                                        l.hidden));
    return d_in;
}

void run_forward(const Offsets& off, const double* p, const Matrix& input, Cache& cache) {
    const Matrix* x = &input;
    for (std::size_t l = 0; l < 3; ++l) {
        conv_forward(*x, p, off.conv[l], off.kernel, cache.conv[l]);
        x = &cache.conv[l].out;
    }
    for (std::size_t l = 0; l < 2; ++l) {
        lstm_forward(*x, p, off.lstm[l], cache.lstm[l]);
        x = &cache.lstm[l].out;
    }
    ConstRowMap w(p + off.head_weight, NetworkConfig::kOutputDim, off.head_in);
    cache.output = *x * w.transpose();
    cache.output.rowwise() += Eigen::Map<const RowVector>(p + off.head_bias, NetworkConfig::kOutputDim);
}

void run_backward(const Offsets& off, const double* p, double* g, const Cache& cache, const Matrix& d_output) {
    const Matrix& features = cache.lstm[1].out;
    RowMap(g + off.head_weight, NetworkConfig::kOutputDim, off.head_in).noalias() += d_output.transpose() * features;
    Eigen::Map<RowVector>(g + off.head_bias, NetworkConfig::kOutputDim) += d_output.colwise().sum();
    Matrix d = d_output * ConstRowMap(p + off.head_weight, NetworkConfig::kOutputDim, off.head_in);
    for (std::size_t l = 2; l-- > 0;) d = lstm_backward(cache.lstm[l], d, p, g, off.lstm[l]);
    for (std::size_t l = 3; l-- > 0;) d = conv_backward(cache.conv[l], d, p, g, off.conv[l], off.kernel);
}

void check_input(const WeightBundle& w, const Matrix& input) {
    if (input.cols() != w.config.input_dim()) {
        throw ConfigError("network input has " + std::to_string(input.cols()) + " columns, expected " +
                          std::to_string(w.config.input_dim()));
    }
    if (input.rows() < 1) throw ConfigError("network input has no frames");
    if (static_cast<std::size_t>(w.params.size()) != parameter_count(w.config)) {
        throw ConfigError("weight vector does not match the network configuration");
    }
}

// Uniform in [-bound, bound) from the top 53 bits of a 64-bit draw.
double uniform(std::mt19937_64& rng, double bound) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * bound;
}

}  // namespace

const char* to_string(Target t) { return t == Target::accel ? "accel" : "gyro"; }

Target target_from_string(const std::string& text) {
    if (text == "accel") return Target::accel;
    if (text == "gyro") return Target::gyro;
    throw ConfigError("unknown network target '" + text + "' (expected accel or gyro)");
}

void NetworkConfig::validate() const {
    for (int c : conv_channels)
        if (c <= 0) throw ConfigError("conv channel counts must be positive");
    for (int h : lstm_hidden)
        if (h <= 0) throw ConfigError("LSTM hidden sizes must be positive");
    if (kernel <= 0) throw ConfigError("conv kernel must be positive");
}

std::vector<ParameterInfo> parameter_layout(const NetworkConfig& cfg) {
    cfg.validate();
    std::vector<ParameterInfo> out;
    std::size_t at = 0;
    auto add = [&](std::string name, std::vector<std::size_t> shape) {
        std::size_t size = 1;
        for (std::size_t s : shape) size *= s;
        out.push_back({std::move(name), std::move(shape), at, size});
        at += size;
    };
    const auto K = static_cast<std::size_t>(cfg.kernel);
    auto in = static_cast<std::size_t>(cfg.input_dim());
    for (std::size_t l = 0; l < 3; ++l) {
        const auto c = static_cast<std::size_t>(cfg.conv_channels[l]);
        add("conv" + std::to_string(l) + ".weight", {K, c, in});
        add("conv" + std::to_string(l) + ".bias", {c});
        in = c;
    }
    for (std::size_t l = 0; l < 2; ++l) {
        const auto h = static_cast<std::size_t>(cfg.lstm_hidden[l]);
        for (const char* dir : {"fwd", "bwd"}) {
            const std::string prefix = "lstm" + std::to_string(l) + "." + dir + ".";
            add(prefix + "w_ih", {4 * h, in});
            add(prefix + "w_hh", {4 * h, h});
            add(prefix + "bias", {4 * h});
        }
        in = 2 * h;
    }
    add("head.weight", {static_cast<std::size_t>(NetworkConfig::kOutputDim), in});
    add("head.bias", {static_cast<std::size_t>(NetworkConfig::kOutputDim)});
    return out;
}

std::size_t parameter_count(const NetworkConfig& cfg) { return Offsets(cfg).total; }

ParameterInfo WeightBundle::info(const std::string& name) const {
    for (auto& p : layout())
        if (p.name == name) return p;
    throw ConfigError("no parameter named '" + name + "'");
}

Eigen::Map<Vector> WeightBundle::slice(const std::string& name) {
    const ParameterInfo p = info(name);
    return {params.data() + p.offset, static_cast<Eigen::Index>(p.size)};
}

Eigen::Map<const Vector> WeightBundle::slice(const std::string& name) const {
    const ParameterInfo p = info(name);
    return {params.data() + p.offset, static_cast<Eigen::Index>(p.size)};
}

void WeightBundle::validate() const {
    config.validate();
    if (static_cast<std::size_t>(params.size()) != parameter_count(config)) {
        throw ConfigError("weight bundle holds " + std::to_string(params.size()) + " parameters, config needs " +
                          std::to_string(parameter_count(config)));
    }
    if (input_mean.size() != config.input_dim() || input_std.size() != config.input_dim()) {
        throw ConfigError("weight bundle standardization statistics do not match the input width");
    }
    if (!params.allFinite() || !input_mean.allFinite() || !input_std.allFinite()) {
        throw NumericalError("weight bundle contains non-finite values");
    }
    if ((input_std.array() <= 0.0).any()) throw ConfigError("weight bundle input std must be positive");
}

WeightBundle init_weights(const NetworkConfig& config, std::uint64_t seed, Target target) {
    config.validate();
    WeightBundle w;
    w.target = target;
    w.config = config;
    w.seed = seed;
    w.params.resize(static_cast<Eigen::Index>(parameter_count(config)));
    w.input_mean = Vector::Zero(config.input_dim());
    w.input_std = Vector::Ones(config.input_dim());

    std::mt19937_64 rng(seed);
    const Offsets off(config);
    double* p = w.params.data();
    auto fill = [&](std::size_t from, std::size_t count, double bound) {
        for (std::size_t k = 0; k < count; ++k) p[from + k] = uniform(rng, bound);
    };
    for (const auto& c : off.conv) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(c.in * config.kernel));
        fill(c.weight, static_cast<std::size_t>(config.kernel * c.out * c.in), bound);
        fill(c.bias, static_cast<std::size_t>(c.out), bound);
    }
    for (const auto& l : off.lstm) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.hidden));
        const auto H = static_cast<std::size_t>(l.hidden);
        for (const auto* d : {&l.fwd, &l.bwd}) {
            fill(d->w_ih, 4 * H * static_cast<std::size_t>(l.in), bound);
            fill(d->w_hh, 4 * H * H, bound);
            fill(d->bias, 4 * H, bound);
            for (std::size_t k = 0; k < H; ++k) p[d->bias + H + k] = 1.0;
        }
    }
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(off.head_in));
    fill(off.head_weight, static_cast<std::size_t>(NetworkConfig::kOutputDim * off.head_in), head_bound);
    fill(off.head_bias, NetworkConfig::kOutputDim, head_bound);
    return w;
}

Matrix forward(const WeightBundle& weights, const Matrix& input) {
    check_input(weights, input);
    Cache cache;
    run_forward(Offsets(weights.config), weights.params.data(), input, cache);
    return cache.output;
}

Matrix forward_features(const WeightBundle& weights, const Matrix& input) {
    check_input(weights, input);
    Cache cache;
    run_forward(Offsets(weights.config), weights.params.data(), input, cache);
    return cache.lstm[1].out;
}

LossGradient loss_and_gradient(const WeightBundle& weights, std::span<const Matrix> inputs,
                               std::span<const Matrix> targets) {
    if (inputs.empty()) throw ConfigError("loss_and_gradient needs a non-empty batch");
    if (inputs.size() != targets.size()) throw ConfigError("batch inputs and targets differ in count");

    std::size_t count = 0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        check_input(weights, inputs[b]);
        if (targets[b].rows() != inputs[b].rows() || targets[b].cols() != NetworkConfig::kOutputDim) {
            throw ConfigError("target window " + std::to_string(b) + " has the wrong shape");
        }
        count += static_cast<std::size_t>(targets[b].size());
    }

    const Offsets off(weights.config);
    const double* p = weights.params.data();
    LossGradient out;
    out.gradient = Vector::Zero(weights.params.size());
    const double scale = 1.0 / static_cast<double>(count);
    Cache cache;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        run_forward(off, p, inputs[b], cache);
        const Matrix residual = cache.output - targets[b];
        out.loss += residual.squaredNorm() * scale;
        run_backward(off, p, out.gradient.data(), cache, (2.0 * scale) * residual);
    }

    if (!std::isfinite(out.loss)) {
        for (const auto& info : weights.layout()) {
            if (!weights.params.segment(static_cast<Eigen::Index>(info.offset), static_cast<Eigen::Index>(info.size))
                     .allFinite()) {
                throw NumericalError("non-finite loss: parameter '" + info.name + "' holds non-finite values");
            }
        }
        for (std::size_t b = 0; b < inputs.size(); ++b) {
            if (!inputs[b].allFinite()) {
                throw NumericalError("non-finite loss: input window " + std::to_string(b) + " is non-finite");
            }
            if (!targets[b].allFinite()) {
                throw NumericalError("non-finite loss: target window " + std::to_string(b) + " is non-finite");
            }
        }
        throw NumericalError("non-finite loss: activations overflowed");
    }
    return out;
}

}  // namespace vimu::simnet

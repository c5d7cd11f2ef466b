#include "vimu/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "vimu/error.hpp"
#include "vimu/io.hpp"
#include "vimu/windowing.hpp"

namespace vimu::post {

Channels to_channels(const ImuSeries& series) {
    series.validate();
    Channels c(static_cast<Eigen::Index>(series.size()), 6);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        c.block<1, 3>(r, 0) = series.accel[i].transpose();
        c.block<1, 3>(r, 3) = series.gyro[i].transpose();
    }
    return c;
}

ImuSeries from_channels(const Channels& data, FrameTag frame, double sample_rate) {
    if (data.cols() != 6) throw ConfigError("IMU channel matrix must have 6 columns");
    ImuSeries s;
    s.frame = frame;
    s.sample_rate = sample_rate;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        s.accel.emplace_back(data(r, 0), data(r, 1), data(r, 2));
        s.gyro.emplace_back(data(r, 3), data(r, 4), data(r, 5));
    }
    return s;
}

std::vector<double> distribution_map(std::span<const double> sim, std::span<const double> reference) {
    if (sim.empty() || reference.empty()) throw ConfigError("distribution_map needs non-empty inputs");
    const std::size_t n = sim.size();
    const std::size_t m = reference.size();

    std::vector<double> ref(reference.begin(), reference.end());
    std::sort(ref.begin(), ref.end());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] < sim[b]; });

    std::vector<double> out(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sim[order[j + 1]] == sim[order[i]]) ++j;
        // 1-based ranks i+1 .. j+1 share their average.
        const double rank = 0.5 * static_cast<double>(i + j + 2);
        const double position = rank / static_cast<double>(n + 1) * static_cast<double>(m + 1);
        double value;
        if (position <= 1.0) {
            value = ref.front();
        } else if (position >= static_cast<double>(m)) {
            value = ref.back();
        } else {
            const double lower = std::floor(position);
            const auto k = static_cast<std::size_t>(lower);
            const double frac = position - lower;
            value = frac == 0.0 ? ref[k - 1] : ref[k - 1] + frac * (ref[k] - ref[k - 1]);
        }
        for (std::size_t k = i; k <= j; ++k) out[order[k]] = value;
        i = j + 1;
    }
    return out;
}

MapScope map_scope_from_string(const std::string& text) {
    if (text == "recording") return MapScope::recording;
    if (text == "channel") return MapScope::channel;
    if (text == "global") return MapScope::global;
    throw ConfigError("unknown map scope '" + text + "' (expected recording, channel or global)");
}

const char* to_string(MapScope scope) {
    switch (scope) {
        case MapScope::recording: return "recording";
        case MapScope::channel: return "channel";
        case MapScope::global: return "global";
    }
    return "?";
}

std::vector<Channels> map_recordings(const std::vector<Channels>& sims, const std::vector<Channels>& references,
                                     MapScope scope) {
    if (sims.empty() || references.empty()) throw ConfigError("distribution mapping needs inputs and references");
    const Eigen::Index cols = sims.front().cols();
    for (const auto& s : sims)
        if (s.cols() != cols) throw ConfigError("recordings differ in channel count");
    for (const auto& r : references)
        if (r.cols() != cols) throw ConfigError("reference channel count differs from the recordings");
    if (scope == MapScope::global && cols != 6) throw ConfigError("global map scope needs 6 IMU channels");

    struct Group {
        std::vector<std::size_t> recordings;
        std::vector<Eigen::Index> channels;
        std::vector<std::size_t> reference_recordings;
    };
    std::vector<std::size_t> all_sims(sims.size()), all_refs(references.size());
    std::iota(all_sims.begin(), all_sims.end(), 0);
    std::iota(all_refs.begin(), all_refs.end(), 0);
    const bool paired = references.size() == sims.size();

    std::vector<Group> groups;
    switch (scope) {
        case MapScope::recording:
            for (std::size_t r = 0; r < sims.size(); ++r)
                for (Eigen::Index c = 0; c < cols; ++c)
                    groups.push_back({{r}, {c}, paired ? std::vector<std::size_t>{r} : all_refs});
            break;
        case MapScope::channel:
            for (Eigen::Index c = 0; c < cols; ++c) groups.push_back({all_sims, {c}, all_refs});
            break;
        case MapScope::global:
            groups.push_back({all_sims, {0, 1, 2}, all_refs});
            groups.push_back({all_sims, {3, 4, 5}, all_refs});
            break;
    }

    std::vector<Channels> out = sims;
    for (const Group& g : groups) {
        std::vector<double> sim_values, ref_values;
        for (std::size_t r : g.recordings)
            for (Eigen::Index c : g.channels)
                for (Eigen::Index i = 0; i < sims[r].rows(); ++i) sim_values.push_back(sims[r](i, c));
        for (std::size_t r : g.reference_recordings)
            for (Eigen::Index c : g.channels)
                for (Eigen::Index i = 0; i < references[r].rows(); ++i) ref_values.push_back(references[r](i, c));
        const std::vector<double> mapped = distribution_map(sim_values, ref_values);
        std::size_t k = 0;
        for (std::size_t r : g.recordings)
            for (Eigen::Index c : g.channels)
                for (Eigen::Index i = 0; i < sims[r].rows(); ++i) out[r](i, c) = mapped[k++];
    }
    return out;
}

ButterworthLowpass::ButterworthLowpass(double cutoff_hz, double sample_rate) {
    if (!(sample_rate > 0.0)) throw ConfigError("low-pass needs a positive sample rate");
    if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0)) {
        throw ConfigError("low-pass cutoff must lie in (0, rate/2)");
    }
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    // Pole-pair quality factors of the 4th-order Butterworth prototype.
    const std::array<double, 2> q = {1.0 / (2.0 * std::sin(std::numbers::pi / 8.0)),
                                     1.0 / (2.0 * std::sin(3.0 * std::numbers::pi / 8.0))};
    for (std::size_t s = 0; s < 2; ++s) {
        const double norm = 1.0 / (1.0 + k / q[s] + k * k);
        Section& sec = sections_[s];
        sec.b0 = k * k * norm;
        sec.b1 = 2.0 * sec.b0;
        sec.b2 = sec.b0;
        sec.a1 = 2.0 * (k * k - 1.0) * norm;
        sec.a2 = (1.0 - k / q[s] + k * k) * norm;
    }
}

std::vector<double> ButterworthLowpass::run(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    double steady = y.front();
    for (const Section& s : sections_) {
        // Steady state of the transposed direct form II for a constant input.
        const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double out = gain * steady;
        double z2 = s.b2 * steady - s.a2 * out;
        double z1 = s.b1 * steady - s.a1 * out + z2;
        for (double& v : y) {
            const double in = v;
            const double o = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * o + z2;
            z2 = s.b2 * in - s.a2 * o;
            v = o;
        }
        steady = out;
    }
    return y;
}

std::vector<double> ButterworthLowpass::filter(std::span<const double> x) const { return run(x); }

std::vector<double> ButterworthLowpass::filtfilt(std::span<const double> x) const {
    const std::size_t n = x.size();
    if (n < 2) return {x.begin(), x.end()};
    const std::size_t pad = std::min<std::size_t>(15, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    std::vector<double> y = run(ext);
    std::reverse(y.begin(), y.end());
    y = run(y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Channels lowpass(const Channels& data, double cutoff_hz, double sample_rate) {
    const ButterworthLowpass filter(cutoff_hz, sample_rate);
    Channels out(data.rows(), data.cols());
    std::vector<double> column(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) column[static_cast<std::size_t>(i)] = data(i, c);
        const std::vector<double> y = filter.filtfilt(column);
        for (Eigen::Index i = 0; i < data.rows(); ++i) out(i, c) = y[static_cast<std::size_t>(i)];
    }
    return out;
}

bool NormStats::any_zero_variance() const {
    return std::any_of(zero_variance.begin(), zero_variance.end(), [](bool b) { return b; });
}

Normalized normalize(const Channels& data) {
    if (data.rows() == 0) throw ConfigError("cannot normalize an empty series");
    Normalized out;
    const auto n = static_cast<double>(data.rows());
    out.stats.mean = data.colwise().mean().transpose();
    const Channels centred = data.rowwise() - out.stats.mean.transpose();
    out.stats.scale = (centred.colwise().squaredNorm().transpose() / n).cwiseSqrt();
    out.stats.zero_variance.assign(static_cast<std::size_t>(data.cols()), false);
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (!(out.stats.scale[c] > 1e-12 * std::max(1.0, std::abs(out.stats.mean[c])))) {
            out.stats.scale[c] = 1.0;
            out.stats.zero_variance[static_cast<std::size_t>(c)] = true;
        }
    }
    out.data = centred.array().rowwise() / out.stats.scale.transpose().array();
    return out;
}

Channels denormalize(const Channels& data, const NormStats& stats) {
    if (data.cols() != stats.mean.size()) throw ConfigError("normalization stats do not match channel count");
    return (data.array().rowwise() * stats.scale.transpose().array()).matrix().rowwise() + stats.mean.transpose();
}

WindowList har_windows(const Channels& data, double sample_rate, double window_seconds, double overlap) {
    WindowList out;
    out.length = window_length(window_seconds, sample_rate);
    out.hop = window_hop(out.length, overlap);
    const auto n = static_cast<std::size_t>(data.rows());
    if (n < out.length) {
        throw ConfigError("series of " + std::to_string(n) + " samples is shorter than one window (" +
                          std::to_string(out.length) + ")");
    }
    const std::size_t count = window_count(n, out.length, out.hop);
    for (std::size_t w = 0; w < count; ++w) {
        out.starts.push_back(w * out.hop);
        out.windows.push_back(
            data.middleRows(static_cast<Eigen::Index>(w * out.hop), static_cast<Eigen::Index>(out.length)));
    }
    return out;
}

std::vector<int> window_labels(const std::vector<int>& labels, const WindowList& windows) {
    std::vector<int> out;
    out.reserve(windows.starts.size());
    for (std::size_t s : windows.starts) {
        if (s + windows.length > labels.size()) throw ConfigError("labels are shorter than the windowed series");
        std::map<int, std::size_t> votes;
        for (std::size_t i = s; i < s + windows.length; ++i) ++votes[labels[i]];
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it)
            if (it->second > best->second) best = it;
        out.push_back(best->first);
    }
    return out;
}

void write_har_export(const std::string& dir, const std::vector<Channels>& windows, const std::vector<int>& labels,
                      const HarExportMeta& meta) {
    if (windows.size() != labels.size()) throw ConfigError("one label per window is required");
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);

    std::ofstream x(root / "X.csv");
    if (!x) throw FormatError("cannot write '" + (root / "X.csv").string() + "'");
    for (const Channels& w : windows) {
        bool first = true;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                if (!first) x << ',';
                x << io::format_double(w(r, c));
                first = false;
            }
        }
        x << '\n';
    }

    std::ofstream y(root / "y.csv");
    if (!y) throw FormatError("cannot write '" + (root / "y.csv").string() + "'");
    for (int label : labels) y << label << '\n';

    nlohmann::json j;
    j["sample_rate"] = meta.sample_rate;
    j["window_seconds"] = meta.window_seconds;
    j["overlap"] = meta.overlap;
    j["window_length"] = meta.window_length;
    j["hop"] = meta.hop;
    j["window_count"] = windows.size();
    j["subject"] = meta.subject;
    j["channel_names"] = meta.channel_names;
    j["layout"] = "frame-major";
    j["lowpass_cutoff_hz"] = meta.lowpass_cutoff_hz;
    j["distribution_mapping"] = meta.distribution_mapping;
    nlohmann::json norm = nlohmann::json::array();
    for (const NormStats& s : meta.normalization) {
        std::vector<double> mean(s.mean.data(), s.mean.data() + s.mean.size());
        std::vector<double> scale(s.scale.data(), s.scale.data() + s.scale.size());
        norm.push_back({{"mean", mean}, {"std", scale}, {"zero_variance", s.zero_variance}});
    }
    j["normalization"] = norm;
    std::ofstream m(root / "meta.json");
    if (!m) throw FormatError("cannot write '" + (root / "meta.json").string() + "'");
    m << j.dump(2) << '\n';
}

}  // namespace vimu::post

#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "vimu/bvh.hpp"
#include "vimu/error.hpp"
#include "vimu/evalkit.hpp"
#include "vimu/io.hpp"
#include "vimu/kinematics.hpp"

namespace vimu::cli {

namespace {

namespace fs = std::filesystem;

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)); }

void require_rate(double motion_rate, const SensorSpec& spec) {
    if (!same_rate(motion_rate, spec.sample_rate)) {
        throw ConfigError("sensor sample rate " + io::format_double(spec.sample_rate) +
                          " Hz differs from the motion rate " + io::format_double(motion_rate) + " Hz");
    }
}

// Parent directory of an output path must exist or be creatable.
void prepare_output(const std::string& path) {
    if (path.empty()) throw ConfigError("output path is empty");
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

struct Motion {
    double sample_rate = 0.0;
    ImuSeries global;
    RotationSeries bone_to_global;
    std::optional<MotionTrackSet> tracks;
    std::string region;
};

std::string pick_region(const MotionTrackSet& set, const std::string& requested) {
    if (!requested.empty()) {
        set.region(requested);
        return requested;
    }
    if (set.regions.size() != 1) throw ConfigError("track set has several regions; pass --region");
    return set.regions.begin()->first;
}

Motion analytic_motion(const MotionSource& src) {
    Motion m;
    m.global.frame = FrameTag::global;
    if (!src.bvh.empty()) {
        if (!src.tracks.empty()) throw ConfigError("give either --tracks or --bvh, not both");
        if (src.joint.empty()) throw ConfigError("--bvh needs --joint");
        if (!(src.bvh_scale > 0.0)) throw ConfigError("--bvh-scale must be positive");
        const bvh::SkeletonAnimation anim = bvh::load_bvh(src.bvh);
        const auto joint = anim.find_joint(src.joint);
        if (!joint) throw ConfigError("unknown joint '" + src.joint + "'");
        const bvh::JointTrack track = bvh::joint_track(anim, *joint, src.bvh_scale);
        m.sample_rate = track.sample_rate;
        m.global.sample_rate = track.sample_rate;
        m.global.accel = kinematics::richardson_second_derivative(track.positions, track.sample_rate).values;
        m.global.gyro = kinematics::angular_velocity(track.orientations, track.sample_rate);
        m.bone_to_global = track.orientations;
        m.region = src.joint;
        return m;
    }
    if (src.tracks.empty()) throw ConfigError("no motion input: pass --tracks or --bvh");
    m.tracks = io::load_track_set(src.tracks);
    m.region = pick_region(*m.tracks, src.region);
    const kinematics::GlobalMotion g = kinematics::region_motion(*m.tracks, m.region);
    m.sample_rate = m.tracks->sample_rate;
    m.global.sample_rate = m.sample_rate;
    m.global.accel = g.accel;
    m.global.gyro = g.gyro;
    m.bone_to_global = m.tracks->bone_to_global(m.region);
    return m;
}

struct LearnedPair {
    simnet::WeightBundle accel;
    simnet::WeightBundle gyro;
};

LearnedPair load_pair(const std::string& prefix) {
    LearnedPair p{simnet::load_weights(prefix + ".accel"), simnet::load_weights(prefix + ".gyro")};
    if (p.accel.target != simnet::Target::accel) throw ConfigError(prefix + ".accel is not an accelerometer network");
    if (p.gyro.target != simnet::Target::gyro) throw ConfigError(prefix + ".gyro is not a gyroscope network");
    return p;
}

simnet::TrainConfig prediction_config(const simnet::WeightBundle& w) {
    return w.trained_with ? *w.trained_with : simnet::TrainConfig{};
}

ImuSeries learned_global(const LearnedPair& nets, const MotionTrackSet& set, const std::string& region) {
    ImuSeries s;
    s.frame = FrameTag::global;
    s.sample_rate = set.sample_rate;
    s.accel = simnet::predict_series(nets.accel, set, region, prediction_config(nets.accel));
    s.gyro = simnet::predict_series(nets.gyro, set, region, prediction_config(nets.gyro));
    return s;
}

SensorSpec load_spec_for(const std::string& path, const std::string& region_override) {
    SensorSpec spec = io::load_sensor_spec(path);
    if (!region_override.empty()) spec.region = region_override;
    return spec;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw ConfigError("expected NAME=PATH, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

template <typename T>
const T& pick(const std::vector<T>& values, std::size_t i, const char* what) {
    if (values.size() == 1) return values.front();
    if (i < values.size()) return values[i];
    throw ConfigError(std::string("give one ") + what + " or one per --tracks");
}

}  // namespace

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open label file '" + path + "'");
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int value = 0;
        const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc{} || end != line.data() + line.size())
            throw FormatError(path + ": '" + line + "' is not an integer label", line_no);
        labels.push_back(value);
    }
    return labels;
}

void cmd_simulate(const SimulateOptions& o, std::ostream& log) {
    if (o.mode != "analytic" && o.mode != "learned") throw ConfigError("--mode must be analytic or learned");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (o.sensor.empty()) throw ConfigError("--sensor is required");
    if (o.mode == "learned" && o.weights.empty()) throw ConfigError("learned mode needs --weights");
    const SensorSpec spec = load_spec_for(o.sensor, o.source.region);

    Motion motion;
    ImuSeries global;
    if (o.mode == "analytic") {
        MotionSource src = o.source;
        if (src.region.empty() && src.bvh.empty()) src.region = spec.region;
        motion = analytic_motion(src);
        global = motion.global;
    } else {
        if (!o.source.bvh.empty()) throw ConfigError("learned mode needs mesh tracks, not a BVH skeleton");
        const LearnedPair nets = load_pair(o.weights);
        if (o.source.tracks.empty()) throw ConfigError("learned mode needs --tracks");
        motion.tracks = io::load_track_set(o.source.tracks);
        motion.region = pick_region(*motion.tracks, o.source.region.empty() ? spec.region : o.source.region);
        motion.sample_rate = motion.tracks->sample_rate;
        motion.bone_to_global = motion.tracks->bone_to_global(motion.region);
        global = learned_global(nets, *motion.tracks, motion.region);
    }
    require_rate(motion.sample_rate, spec);
    const ImuSeries sensor = kinematics::to_sensor_frame(global, motion.bone_to_global, spec);

    prepare_output(o.out);
    if (!o.emit_global.empty()) prepare_output(o.emit_global);
    io::write_imu_csv(sensor, o.out);
    if (!o.emit_global.empty()) io::write_imu_csv(global, o.emit_global);
    log << "simulate: " << sensor.size() << " samples (" << o.mode << ", region " << motion.region << ") -> " << o.out
        << '\n';
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
    if (o.tracks.empty()) throw ConfigError("--tracks is required");
    if (o.imu.size() != o.tracks.size()) throw ConfigError("give one --imu per --tracks");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (o.target != "accel" && o.target != "gyro" && o.target != "both")
        throw ConfigError("--target must be accel, gyro or both");
    o.config.validate();

    std::vector<MotionTrackSet> sets;
    std::vector<ImuSeries> targets;
    std::vector<std::string> regions;
    sets.reserve(o.tracks.size());
    targets.reserve(o.tracks.size());
    for (std::size_t i = 0; i < o.tracks.size(); ++i) {
        sets.push_back(io::load_track_set(o.tracks[i]));
        const MotionTrackSet& set = sets.back();
        ImuSeries imu = io::read_imu_csv(o.imu[i]);
        std::string region = o.regions.empty() ? "" : pick(o.regions, i, "--region");
        if (imu.frame == FrameTag::sensor) {
            if (o.sensors.empty()) throw ConfigError(o.imu[i] + " is in the sensor frame; pass --sensor");
            const SensorSpec spec = load_spec_for(pick(o.sensors, i, "--sensor"), region);
            region = pick_region(set, spec.region);
            require_rate(set.sample_rate, spec);
            imu = kinematics::from_sensor_frame(imu, set.bone_to_global(region), spec);
        } else {
            region = pick_region(set, region);
        }
        targets.push_back(std::move(imu));
        regions.push_back(region);
    }
    std::vector<simnet::TrainingRecord> records;
    for (std::size_t i = 0; i < sets.size(); ++i) records.push_back({&sets[i], regions[i], &targets[i]});

    std::vector<simnet::Target> which;
    if (o.target != "gyro") which.push_back(simnet::Target::accel);
    if (o.target != "accel") which.push_back(simnet::Target::gyro);

    std::vector<simnet::TrainResult> results;
    for (simnet::Target t : which) {
        const simnet::WindowSet windows = simnet::build_windows(records, o.config, t);
        log << "train " << simnet::to_string(t) << ": " << windows.inputs.size() << " windows of "
            << windows.window_length << " frames\n";
        results.push_back(simnet::train(windows, o.config));
    }

    prepare_output(o.out);
    std::ofstream loss(o.out + ".loss.csv");
    if (!loss) throw FormatError("cannot write '" + o.out + ".loss.csv'");
    loss << "epoch,target,loss\n";
    for (std::size_t k = 0; k < which.size(); ++k) {
        simnet::save_weights(results[k].weights, o.out + "." + simnet::to_string(which[k]));
        const auto& h = results[k].loss_history;
        for (std::size_t e = 0; e < h.size(); ++e)
            loss << (e + 1) << ',' << simnet::to_string(which[k]) << ',' << io::format_double(h[e]) << '\n';
        if (!h.empty()) log << simnet::to_string(which[k]) << " loss " << h.front() << " -> " << h.back() << '\n';
    }
}

void cmd_eval(const EvalOptions& o, std::ostream& log) {
    if (o.gt.empty()) throw ConfigError("--gt is required");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (o.modality.empty()) throw ConfigError("--modality must not be empty");
    const ImuSeries gt = io::read_imu_csv(o.gt);

    std::map<std::string, ImuSeries> methods;
    for (const auto& entry : o.sims) {
        auto [name, path] = split_assignment(entry);
        if (methods.count(name)) throw ConfigError("method '" + name + "' given twice");
        methods.emplace(name, io::read_imu_csv(path));
    }
    const bool have_motion = !o.source.tracks.empty() || !o.source.bvh.empty();
    if (!o.weights.empty() && o.source.tracks.empty()) throw ConfigError("--weights needs --tracks");
    if (have_motion) {
        if (o.sensor.empty()) throw ConfigError("simulating for eval needs --sensor");
        const SensorSpec spec = load_spec_for(o.sensor, o.source.region);
        MotionSource src = o.source;
        if (src.region.empty() && src.bvh.empty()) src.region = spec.region;
        const Motion motion = analytic_motion(src);
        require_rate(motion.sample_rate, spec);
        auto in_gt_frame = [&](const ImuSeries& global) {
            return gt.frame == FrameTag::global ? global
                                                : kinematics::to_sensor_frame(global, motion.bone_to_global, spec);
        };
        if (methods.count("analytic") || methods.count("learned"))
            throw ConfigError("--sim names 'analytic' and 'learned' are reserved when simulating");
        methods.emplace("analytic", in_gt_frame(motion.global));
        if (!o.weights.empty()) {
            const LearnedPair nets = load_pair(o.weights);
            methods.emplace("learned", in_gt_frame(learned_global(nets, *motion.tracks, motion.region)));
        }
    }
    if (methods.empty()) throw ConfigError("nothing to evaluate: pass --sim or --tracks/--bvh");

    std::vector<eval::ResultRow> rows;
    std::vector<std::pair<std::string, eval::TraceComparison>> traces;
    for (const auto& [name, sim] : methods) {
        if (name.find_first_of(" \t,=/") != std::string::npos)
            throw ConfigError("method name '" + name + "' may not contain spaces, commas, '=' or '/'");
        if (!same_rate(sim.sample_rate, gt.sample_rate))
            throw ConfigError("method '" + name + "' has a different sample rate from the ground truth");
        eval::TraceComparison t = eval::compare_traces(sim, gt, name, "gt");
        rows.push_back({name, o.modality, t.error});
        traces.emplace_back(name, std::move(t));
    }

    fs::create_directories(o.out);
    const fs::path dir(o.out);
    eval::write_results_table((dir / "results.csv").string(), rows);
    eval::write_axis_table((dir / "results_axis.csv").string(), rows);
    for (const auto& [name, t] : traces) eval::write_trace_file(t, (dir / ("trace_" + name + ".csv")).string());
    for (const auto& r : rows)
        log << r.method << ": accel " << r.error.accel << " m/s^2, gyro " << r.error.gyro << " rad/s\n";
}

void cmd_export_har(const ExportHarOptions& o, std::ostream& log) {
    if (o.inputs.empty()) throw ConfigError("--input is required");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (o.labels.empty() == !o.label.has_value()) throw ConfigError("give either --labels files or a single --label");
    if (!o.labels.empty() && o.labels.size() != o.inputs.size()) throw ConfigError("give one --labels per --input");
    const post::MapScope scope = post::map_scope_from_string(o.map_scope);
    if (!(o.window > 0.0)) throw ConfigError("--window must be positive");
    if (!(o.overlap >= 0.0 && o.overlap < 1.0)) throw ConfigError("--overlap must lie in [0, 1)");
    if (!(o.cutoff > 0.0)) throw ConfigError("--cutoff must be positive");

    std::vector<ImuSeries> inputs;
    for (const auto& path : o.inputs) inputs.push_back(io::read_imu_csv(path));
    const double rate = inputs.front().sample_rate;
    const FrameTag frame = inputs.front().frame;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!same_rate(inputs[i].sample_rate, rate)) throw ConfigError(o.inputs[i] + ": sample rate differs");
        if (inputs[i].frame != frame) throw ConfigError(o.inputs[i] + ": frame differs from the first input");
    }
    std::vector<std::vector<int>> labels;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        labels.push_back(o.label ? std::vector<int>(inputs[i].size(), *o.label) : read_labels(o.labels[i]));
        if (labels.back().size() != inputs[i].size())
            throw ConfigError(o.labels[i] + ": " + std::to_string(labels.back().size()) + " labels for " +
                              std::to_string(inputs[i].size()) + " samples");
    }

    post::HarExportMeta meta;
    meta.sample_rate = rate;
    meta.window_seconds = o.window;
    meta.overlap = o.overlap;
    meta.subject = o.subject;
    meta.lowpass_cutoff_hz = o.cutoff;

    std::vector<post::Channels> conditioned;
    for (const auto& s : inputs) {
        post::Normalized n = post::normalize(post::lowpass(post::to_channels(s), o.cutoff, rate));
        conditioned.push_back(std::move(n.data));
        meta.normalization.push_back(std::move(n.stats));
    }
    if (!o.references.empty()) {
        std::vector<post::Channels> refs;
        for (const auto& path : o.references) {
            const ImuSeries r = io::read_imu_csv(path);
            if (!same_rate(r.sample_rate, rate)) throw ConfigError(path + ": reference sample rate differs");
            refs.push_back(post::normalize(post::lowpass(post::to_channels(r), o.cutoff, rate)).data);
        }
        conditioned = post::map_recordings(conditioned, refs, scope);
        meta.distribution_mapping = post::to_string(scope);
    } else {
        meta.distribution_mapping = "skipped";
    }

    std::vector<post::Channels> windows;
    std::vector<int> window_labels;
    for (std::size_t i = 0; i < conditioned.size(); ++i) {
        post::WindowList w = post::har_windows(conditioned[i], rate, o.window, o.overlap);
        meta.window_length = w.length;
        meta.hop = w.hop;
        const auto l = post::window_labels(labels[i], w);
        window_labels.insert(window_labels.end(), l.begin(), l.end());
        for (auto& m : w.windows) windows.push_back(std::move(m));
    }
    post::write_har_export(o.out, windows, window_labels, meta);
    log << "export-har: " << windows.size() << " windows of " << meta.window_length << " samples -> " << o.out << '\n';
}

void cmd_condition(const ConditionOptions& o, std::ostream& log) {
    if (o.tracks.empty() || o.out.empty()) throw ConfigError("--tracks and --out are required");
    trajectory::Interpolation method;
    if (o.interpolation == "linear") method = trajectory::Interpolation::linear;
    else if (o.interpolation == "cubic") method = trajectory::Interpolation::cubic;
    else if (o.interpolation == "auto") method = trajectory::Interpolation::automatic;
    else throw ConfigError("--interp must be linear, cubic or auto");
    if (o.known_length.has_value() != o.estimated_length.has_value())
        throw ConfigError("--known-length and --estimated-length go together");
    if (o.kalman) o.kalman_params.validate();

    MotionTrackSet set = io::load_track_set(o.tracks);
    const std::vector<double> conf = set.confidence.value_or(std::vector<double>(set.frame_count, 1.0));
    std::size_t gated = 0;
    for (double c : conf) gated += c < o.threshold;
    for (auto& [id, track] : set.vertices) {
        Vec3Series p = trajectory::interpolate_gaps(
            trajectory::gate_by_confidence(track, conf, o.threshold, set.sample_rate), method);
        if (o.kalman) p = trajectory::kalman_smooth(p, set.sample_rate, o.kalman_params);
        if (o.known_length) p = trajectory::resolve_scale(p, *o.known_length, *o.estimated_length);
        track = std::move(p);
    }
    set.confidence.reset();
    set.validate();
    prepare_output(o.out);
    io::store_track_set(set, o.out);
    log << "condition: " << gated << " of " << set.frame_count << " frames re-estimated -> "
        << io::track_set_stem(o.out) << '\n';
}

void cmd_splits(const SplitsOptions& o, std::ostream& log) {
    std::vector<std::string> ids;
    for (const auto& s : o.subjects) {
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto comma = s.find(',', start);
            const std::string id = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!id.empty()) ids.push_back(id);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (ids.empty()) throw ConfigError("--subjects is required");
    const auto splits = eval::subject_holdout_splits(ids, o.seed, o.k);
    std::ofstream file;
    if (!o.out.empty()) {
        prepare_output(o.out);
        file.open(o.out);
        if (!file) throw FormatError("cannot write '" + o.out + "'");
    }
    std::ostream& out = o.out.empty() ? log : file;
    out << "fold,test_subject,train_subjects\n";
    for (std::size_t f = 0; f < splits.size(); ++f) {
        out << (f + 1) << ',' << splits[f].test << ',';
        for (std::size_t i = 0; i < splits[f].train.size(); ++i) out << (i ? ";" : "") << splits[f].train[i];
        out << '\n';
    }
}

void cmd_score_har(const ScoreHarOptions& o, std::ostream& log) {
    if (o.folds.empty()) throw ConfigError("--fold is required");
    if (o.out.empty()) throw ConfigError("--out is required");
    std::vector<eval::FoldScore> scores;
    for (const auto& f : o.folds) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t comma; (comma = f.find(',', start)) != std::string::npos; start = comma + 1)
            parts.push_back(f.substr(start, comma - start));
        parts.push_back(f.substr(start));
        if (parts.size() != 4) throw ConfigError("--fold expects SETTING,SUBJECT,PREDICTIONS,LABELS, got '" + f + "'");
        const double f1 = eval::macro_f1(read_labels(parts[2]), read_labels(parts[3]));
        scores.push_back({parts[0], parts[1], f1});
        log << parts[0] << ' ' << parts[1] << ": F1 " << f1 << '\n';
    }
    prepare_output(o.out);
    eval::write_f1_report(o.out, scores);
}

}  // namespace vimu::cli

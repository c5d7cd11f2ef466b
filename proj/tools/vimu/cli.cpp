#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <ostream>

#include "commands.hpp"
#include "vimu/error.hpp"
#include "vimu/io.hpp"
#include "vimu/simnet.hpp"

namespace vimu::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

void add_motion_source(CLI::App& cmd, MotionSource& src) {
    cmd.add_option("--tracks", src.tracks, "Mesh-track set (<name>, <name>.tracks.json or .tracks.csv)");
    cmd.add_option("--region", src.region, "Skin region (defaults to the sensor spec's region)");
    cmd.add_option("--bvh", src.bvh, "BVH skeleton instead of mesh tracks");
    cmd.add_option("--joint", src.joint, "BVH joint carrying the sensor");
    cmd.add_option("--bvh-scale", src.bvh_scale, "Multiplier from BVH length units to meters");
}

void add_network_options(CLI::App& cmd, simnet::TrainConfig& c) {
    cmd.add_option("--window", c.window_seconds, "Window length in seconds")->capture_default_str();
    cmd.add_option("--overlap", c.overlap, "Window overlap fraction")->capture_default_str();
    cmd.add_option("--batch", c.batch_size, "Windows per mini-batch")->capture_default_str();
    cmd.add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
    cmd.add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
    cmd.add_option("--beta1", c.beta1)->capture_default_str();
    cmd.add_option("--beta2", c.beta2)->capture_default_str();
    cmd.add_option("--eps", c.epsilon)->capture_default_str();
    cmd.add_option("--seed", c.seed, "Initialization and shuffling seed")->capture_default_str();
    cmd.add_option("--conv-channels", c.network.conv_channels, "Output channels of the 3 conv layers")
        ->capture_default_str();
    cmd.add_option("--kernel", c.network.kernel, "Conv kernel width (odd)")->capture_default_str();
    cmd.add_option("--hidden", c.network.lstm_hidden, "Hidden size of the 2 biLSTM layers")
        ->capture_default_str();
    cmd.add_flag("--append-orientation", c.network.append_orientation,
                 "Append the bone quaternion to the 27 vertex coordinates");
}

std::string version_text() {
    return std::string("vimu ") + kVersion + "\nmesh-track format " + std::to_string(io::kTrackFormatVersion) +
           "\nsensor spec format " + std::to_string(io::kSensorSpecVersion) + "\nweights format " +
           std::to_string(simnet::kWeightFormatVersion) + "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Virtual IMU simulator: accelerometer and gyroscope readings from body motion"};
    app.name("vimu");
    app.set_config("--config", "", "TOML-style file with defaults; command-line flags take precedence");
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "Print supported format versions");

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate sensor-frame IMU readings");
    add_motion_source(*simulate, sim.source);
    simulate->add_option("--sensor", sim.sensor, "Sensor spec JSON")->required();
    simulate->add_option("--mode", sim.mode, "analytic or learned")
        ->check(CLI::IsMember({"analytic", "learned"}))
        ->capture_default_str();
    simulate->add_option("--weights", sim.weights, "Weights prefix: loads <prefix>.accel and <prefix>.gyro");
    simulate->add_option("--out", sim.out, "Output IMU CSV")->required();
    simulate->add_option("--emit-global", sim.emit_global, "Also write the global-frame readings here");

    TrainOptions tr;
    CLI::App* train = app.add_subcommand("train", "Train the accelerometer and/or gyroscope network");
    train->add_option("--tracks", tr.tracks, "Mesh-track set (repeatable)")->required();
    train->add_option("--region", tr.regions, "Region, once or once per --tracks");
    train->add_option("--imu", tr.imu, "Ground-truth IMU CSV, one per --tracks")->required();
    train->add_option("--sensor", tr.sensors, "Sensor spec for sensor-frame IMU files, once or per --tracks");
    train->add_option("--target", tr.target, "accel, gyro or both")
        ->check(CLI::IsMember({"accel", "gyro", "both"}))
        ->capture_default_str();
    train->add_option("--out", tr.out, "Output prefix for <out>.accel, <out>.gyro, <out>.loss.csv")->required();
    add_network_options(*train, tr.config);

    EvalOptions ev;
    CLI::App* evaluate = app.add_subcommand("eval", "RMSE table and trace files against ground truth");
    evaluate->add_option("--gt", ev.gt, "Ground-truth IMU CSV")->required();
    evaluate->add_option("--sim", ev.sims, "Precomputed simulation NAME=PATH (repeatable)");
    add_motion_source(*evaluate, ev.source);
    evaluate->add_option("--sensor", ev.sensor, "Sensor spec used when simulating");
    evaluate->add_option("--weights", ev.weights, "Weights prefix; adds a 'learned' row");
    evaluate->add_option("--modality", ev.modality, "Modality label for the table")->capture_default_str();
    evaluate->add_option("--out", ev.out, "Output directory")->required();

    ExportHarOptions har;
    CLI::App* export_har = app.add_subcommand("export-har", "Condition and window IMU data for a HAR model");
    export_har->add_option("--input", har.inputs, "IMU CSV (repeatable)")->required();
    export_har->add_option("--labels", har.labels, "Per-sample label file, one per --input");
    export_har->add_option("--label", har.label, "Single label for every sample");
    export_har->add_option("--reference", har.references, "Real IMU CSV for distribution mapping (repeatable)");
    export_har->add_option("--map-scope", har.map_scope, "recording, channel or global")
        ->check(CLI::IsMember({"recording", "channel", "global"}))
        ->capture_default_str();
    export_har->add_option("--cutoff", har.cutoff, "Low-pass cutoff in Hz")->capture_default_str();
    export_har->add_option("--window", har.window, "Window length in seconds")->capture_default_str();
    export_har->add_option("--overlap", har.overlap, "Window overlap fraction")->capture_default_str();
    export_har->add_option("--subject", har.subject, "Subject id recorded in meta.json");
    export_har->add_option("--out", har.out, "Output directory")->required();

    ConditionOptions cond;
    CLI::App* condition = app.add_subcommand("condition", "Gate, interpolate, smooth and rescale mesh tracks");
    condition->add_option("--tracks", cond.tracks, "Input mesh-track set")->required();
    condition->add_option("--out", cond.out, "Output mesh-track stem")->required();
    condition->add_option("--threshold", cond.threshold, "Confidence threshold")->capture_default_str();
    condition->add_option("--interp", cond.interpolation, "linear, cubic or auto")
        ->check(CLI::IsMember({"linear", "cubic", "auto"}))
        ->capture_default_str();
    condition->add_flag("--kalman", cond.kalman, "Apply the Kalman/RTS smoother");
    condition->add_option("--process-noise", cond.kalman_params.process_noise)->capture_default_str();
    condition->add_option("--measurement-noise", cond.kalman_params.measurement_noise)->capture_default_str();
    condition->add_option("--initial-variance", cond.kalman_params.initial_variance)->capture_default_str();
    condition->add_option("--known-length", cond.known_length, "Reference length in meters");
    condition->add_option("--estimated-length", cond.estimated_length, "Same length measured in the tracks");

    SplitsOptions sp;
    CLI::App* splits = app.add_subcommand("splits", "Seeded single-subject-out folds");
    splits->add_option("--subjects", sp.subjects, "Subject ids, comma separated or repeated")->required();
    splits->add_option("--seed", sp.seed)->capture_default_str();
    splits->add_option("-k", sp.k, "Number of folds")->capture_default_str();
    splits->add_option("--out", sp.out, "CSV file (default: stdout)");

    ScoreHarOptions score;
    CLI::App* score_har = app.add_subcommand("score-har", "Macro F1 report from HAR predictions");
    score_har->add_option("--fold", score.folds, "SETTING,SUBJECT,PREDICTIONS,LABELS (repeatable)")->required();
    score_har->add_option("--out", score.out, "F1 report CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::FileError& e) {
        err << e.what() << '\n';
        return static_cast<int>(ErrorKind::format);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
    }

    if (show_version) {
        out << version_text();
        return 0;
    }
    try {
        if (simulate->parsed()) cmd_simulate(sim, out);
        else if (train->parsed()) cmd_train(tr, out);
        else if (evaluate->parsed()) cmd_eval(ev, out);
        else if (export_har->parsed()) cmd_export_har(har, out);
        else if (condition->parsed()) cmd_condition(cond, out);
        else if (splits->parsed()) cmd_splits(sp, out);
        else if (score_har->parsed()) cmd_score_har(score, out);
        else {
            out << app.help();
            return static_cast<int>(ErrorKind::config);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::format);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace vimu::cli

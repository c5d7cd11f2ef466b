#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vimu/postprocess.hpp"
#include "vimu/simnet.hpp"
#include "vimu/trajectory.hpp"

namespace vimu::cli {

// Motion input shared by simulate and eval: a mesh-track set or a BVH joint.
struct MotionSource {
    std::string tracks;
    std::string region;
    std::string bvh;
    std::string joint;
    double bvh_scale = 1.0;
};

struct SimulateOptions {
    MotionSource source;
    std::string sensor;
    std::string mode = "analytic";
    std::string weights;
    std::string out;
    std::string emit_global;
};

struct TrainOptions {
    std::vector<std::string> tracks;
    std::vector<std::string> regions;
    std::vector<std::string> imu;
    std::vector<std::string> sensors;
    std::string target = "both";
    std::string out;
    simnet::TrainConfig config;
};

struct EvalOptions {
    std::string gt;
    std::vector<std::string> sims;  // name=path
    MotionSource source;
    std::string sensor;
    std::string weights;
    std::string modality = "mesh";
    std::string out;
};

struct ExportHarOptions {
    std::vector<std::string> inputs;
    std::vector<std::string> labels;
    std::optional<int> label;
    std::vector<std::string> references;
    std::string map_scope = "recording";
    double cutoff = post::kDefaultCutoffHz;
    double window = 1.0;
    double overlap = 0.5;
    std::string subject;
    std::string out;
};

struct ConditionOptions {
    std::string tracks;
    std::string out;
    double threshold = trajectory::kDefaultConfidenceThreshold;
    std::string interpolation = "auto";
    bool kalman = false;
    trajectory::KalmanParams kalman_params;
    std::optional<double> known_length;
    std::optional<double> estimated_length;
};

struct SplitsOptions {
    std::vector<std::string> subjects;
    std::uint64_t seed = 0;
    std::size_t k = 1;
    std::string out;
};

struct ScoreHarOptions {
    std::vector<std::string> folds;  // setting,subject,predictions,labels
    std::string out;
};

void cmd_simulate(const SimulateOptions& o, std::ostream& log);
void cmd_train(const TrainOptions& o, std::ostream& log);
void cmd_eval(const EvalOptions& o, std::ostream& log);
void cmd_export_har(const ExportHarOptions& o, std::ostream& log);
void cmd_condition(const ConditionOptions& o, std::ostream& log);
void cmd_splits(const SplitsOptions& o, std::ostream& log);
void cmd_score_har(const ScoreHarOptions& o, std::ostream& log);

// One integer label per line.
std::vector<int> read_labels(const std::string& path);

}  // namespace vimu::cli

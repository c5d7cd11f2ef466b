#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vimu/postprocess.hpp"
#include "vimu/types.hpp"

namespace vimu::eval {

/// Root mean square errors pooled over samples and the three axes, with the
/// per-axis breakdown alongside.
struct Rmse {
    double accel = 0.0;
    double gyro = 0.0;
    Vec3 accel_axis = Vec3::Zero();
    Vec3 gyro_axis = Vec3::Zero();
};

// Throws ConfigError on length or frame mismatch.
Rmse rmse(const ImuSeries& sim, const ImuSeries& gt);

/// Unweighted mean over classes of per-class F1. Classes seen in neither
/// input are ignored; an undefined precision or recall counts as 0.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels);

struct HoldoutSplit {
    std::vector<std::string> train;
    std::string test;
};

/// `k` distinct test subjects drawn without replacement with a seeded
/// 64-bit Mersenne Twister; duplicate ids are collapsed first.
std::vector<HoldoutSplit> subject_holdout_splits(const std::vector<std::string>& subjects, std::uint64_t seed,
                                                 std::size_t k);

/// Two aligned series and their difference, for plotting.
struct TraceComparison {
    std::string label_a = "a";
    std::string label_b = "b";
    FrameTag frame = FrameTag::sensor;
    double sample_rate = 0.0;
    post::Channels a;
    post::Channels b;
    Rmse error;

    post::Channels residual() const { return a - b; }
};

TraceComparison compare_traces(const ImuSeries& a, const ImuSeries& b, const std::string& label_a = "a",
                               const std::string& label_b = "b");

/// Plot-data file: three `#` annotation lines (labels/frame/rate, pooled
/// RMSE, per-axis RMSE) then `t,ax_a,ax_b,ax_res,...,gz_res`.
void write_trace_file(const TraceComparison& traces, const std::string& path);
TraceComparison read_trace_file(const std::string& path);

struct ResultRow {
    std::string method;
    std::string modality;
    Rmse error;
};

// `method,modality,accel_rmse,gyro_rmse`, rows sorted by method then modality.
void write_results_table(const std::string& path, std::vector<ResultRow> rows);
// Same rows with `accel_rmse_x..gyro_rmse_z` columns.
void write_axis_table(const std::string& path, std::vector<ResultRow> rows);

struct FoldScore {
    std::string setting;  // e.g. R2R, V2R, Mix2R
    std::string test_subject;
    double f1 = 0.0;
};

/// `setting,row,test_subject,f1`: one row per fold, then `mean` and `std`
/// (sample standard deviation) rows for every setting.
void write_f1_report(const std::string& path, const std::vector<FoldScore>& folds);

}  // namespace vimu::eval

#include "vimu/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "csv_util.hpp"
#include "vimu/error.hpp"
#include "vimu/io.hpp"

namespace vimu::eval {

using io::format_double;

Rmse rmse(const ImuSeries& sim, const ImuSeries& gt) {
    sim.validate();
    gt.validate();
    if (sim.size() != gt.size()) {
        throw ConfigError("rmse: series lengths differ (" + std::to_string(sim.size()) + " vs " +
                          std::to_string(gt.size()) + ")");
    }
    if (sim.frame != gt.frame) throw ConfigError("rmse: series are in different frames");
    if (sim.size() == 0) throw ConfigError("rmse: empty series");

    Rmse out;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        out.accel_axis += (sim.accel[i] - gt.accel[i]).cwiseAbs2();
        out.gyro_axis += (sim.gyro[i] - gt.gyro[i]).cwiseAbs2();
    }
    const auto n = static_cast<double>(sim.size());
    out.accel = std::sqrt(out.accel_axis.sum() / (3.0 * n));
    out.gyro = std::sqrt(out.gyro_axis.sum() / (3.0 * n));
    out.accel_axis = (out.accel_axis / n).cwiseSqrt();
    out.gyro_axis = (out.gyro_axis / n).cwiseSqrt();
    return out;
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty() || labels.empty()) throw ConfigError("macro_f1: empty input");
    if (predictions.size() != labels.size()) throw ConfigError("macro_f1: predictions and labels differ in length");

    std::set<int> classes(labels.begin(), labels.end());
    classes.insert(predictions.begin(), predictions.end());
    double total = 0.0;
    for (int c : classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const bool predicted = predictions[i] == c;
            const bool actual = labels[i] == c;
            tp += predicted && actual;
            fp += predicted && !actual;
            fn += !predicted && actual;
        }
        const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        total += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return total / static_cast<double>(classes.size());
}

std::vector<HoldoutSplit> subject_holdout_splits(const std::vector<std::string>& subjects, std::uint64_t seed,
                                                 std::size_t k) {
    std::vector<std::string> ids(subjects.begin(), subjects.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (k > ids.size()) {
        throw ConfigError("cannot hold out " + std::to_string(k) + " subjects from " + std::to_string(ids.size()));
    }
    std::mt19937_64 rng(seed);
    std::vector<std::string> drawn = ids;
    for (std::size_t i = drawn.size(); i > 1; --i) std::swap(drawn[i - 1], drawn[static_cast<std::size_t>(rng() % i)]);

    std::vector<HoldoutSplit> out;
    for (std::size_t f = 0; f < k; ++f) {
        HoldoutSplit split;
        split.test = drawn[f];
        for (const auto& id : ids)
            if (id != split.test) split.train.push_back(id);
        out.push_back(std::move(split));
    }
    return out;
}

TraceComparison compare_traces(const ImuSeries& a, const ImuSeries& b, const std::string& label_a,
                               const std::string& label_b) {
    for (const std::string* label : {&label_a, &label_b}) {
        if (label->empty() || label->find_first_of(" \t\n,=") != std::string::npos) {
            throw ConfigError("trace labels must be non-empty and free of spaces, commas and '='");
        }
    }
    TraceComparison t;
    t.error = rmse(a, b);
    t.label_a = label_a;
    t.label_b = label_b;
    t.frame = a.frame;
    t.sample_rate = a.sample_rate;
    t.a = post::to_channels(a);
    t.b = post::to_channels(b);
    return t;
}

void write_trace_file(const TraceComparison& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write trace file '" + path + "'");
    out << "# trace a=" << t.label_a << " b=" << t.label_b << " frame=" << to_string(t.frame)
        << " rate=" << format_double(t.sample_rate) << '\n';
    out << "# rmse accel=" << format_double(t.error.accel) << " gyro=" << format_double(t.error.gyro) << '\n';
    out << "# rmse_axis";
    for (int k = 0; k < 3; ++k) out << ' ' << post::kImuChannelNames[k] << '=' << format_double(t.error.accel_axis[k]);
    for (int k = 0; k < 3; ++k) out << ' ' << post::kImuChannelNames[3 + k] << '=' << format_double(t.error.gyro_axis[k]);
    out << '\n';
    out << 't';
    for (const auto& name : post::kImuChannelNames) out << ',' << name << "_a," << name << "_b," << name << "_res";
    out << '\n';
    const post::Channels res = t.residual();
    for (Eigen::Index i = 0; i < t.a.rows(); ++i) {
        out << format_double(static_cast<double>(i) / t.sample_rate);
        for (Eigen::Index c = 0; c < 6; ++c) {
            out << ',' << format_double(t.a(i, c)) << ',' << format_double(t.b(i, c)) << ',' << format_double(res(i, c));
        }
        out << '\n';
    }
    if (!out) throw FormatError("failed while writing '" + path + "'");
}

TraceComparison read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open trace file '" + path + "'");
    TraceComparison t;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<std::array<double, 12>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        io::detail::strip_cr(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto kv = io::detail::parse_key_values(line.substr(1));
            auto num = [&](const char* key) {
                if (!kv.count(key)) throw FormatError(path + ": annotation lacks '" + key + "'", line_no);
                return io::detail::parse_double(kv[key], path, line_no);
            };
            if (line.rfind("# trace", 0) == 0) {
                t.label_a = kv["a"];
                t.label_b = kv["b"];
                t.frame = frame_tag_from_string(kv["frame"]);
                t.sample_rate = num("rate");
            } else if (line.rfind("# rmse_axis", 0) == 0) {
                for (int k = 0; k < 3; ++k) {
                    t.error.accel_axis[k] = num(post::kImuChannelNames[k].c_str());
                    t.error.gyro_axis[k] = num(post::kImuChannelNames[3 + k].c_str());
                }
            } else if (line.rfind("# rmse", 0) == 0) {
                t.error.accel = num("accel");
                t.error.gyro = num("gyro");
            }
            continue;
        }
        auto cells = io::detail::split_csv(line);
        if (!header) {
            if (cells.size() != 19 || cells[0] != "t") throw FormatError(path + ": unexpected trace header", line_no);
            header = true;
            continue;
        }
        if (cells.size() != 19) throw FormatError(path + ": expected 19 columns", line_no);
        std::array<double, 12> r{};
        for (int c = 0; c < 6; ++c) {
            r[static_cast<std::size_t>(c)] = io::detail::parse_double(cells[static_cast<std::size_t>(1 + 3 * c)], path, line_no);
            r[static_cast<std::size_t>(6 + c)] =
                io::detail::parse_double(cells[static_cast<std::size_t>(2 + 3 * c)], path, line_no);
        }
        rows.push_back(r);
    }
    if (!header) throw FormatError(path + ": missing trace header");
    t.a.resize(static_cast<Eigen::Index>(rows.size()), 6);
    t.b.resize(static_cast<Eigen::Index>(rows.size()), 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < 6; ++c) {
            t.a(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
            t.b(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(6 + c)];
        }
    }
    return t;
}

namespace {

void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& x, const ResultRow& y) {
        return std::tie(x.method, x.modality) < std::tie(y.method, y.modality);
    });
}

}  // namespace

void write_results_table(const std::string& path, std::vector<ResultRow> rows) {
    sort_rows(rows);
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write results table '" + path + "'");
    out << "method,modality,accel_rmse,gyro_rmse\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.modality << ',' << format_double(r.error.accel) << ',' << format_double(r.error.gyro)
            << '\n';
    }
}

void write_axis_table(const std::string& path, std::vector<ResultRow> rows) {
    sort_rows(rows);
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write axis table '" + path + "'");
    out << "method,modality,accel_rmse_x,accel_rmse_y,accel_rmse_z,gyro_rmse_x,gyro_rmse_y,gyro_rmse_z\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.modality;
        for (int k = 0; k < 3; ++k) out << ',' << format_double(r.error.accel_axis[k]);
        for (int k = 0; k < 3; ++k) out << ',' << format_double(r.error.gyro_axis[k]);
        out << '\n';
    }
}

void write_f1_report(const std::string& path, const std::vector<FoldScore>& folds) {
    if (folds.empty()) throw ConfigError("F1 report needs at least one fold");
    std::vector<std::string> settings;
    std::map<std::string, std::vector<const FoldScore*>> by_setting;
    for (const auto& f : folds) {
        if (!by_setting.count(f.setting)) settings.push_back(f.setting);
        by_setting[f.setting].push_back(&f);
    }
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write F1 report '" + path + "'");
    out << "setting,row,test_subject,f1\n";
    for (const auto& s : settings) {
        const auto& list = by_setting[s];
        double sum = 0.0;
        for (std::size_t i = 0; i < list.size(); ++i) {
            out << s << ",fold" << (i + 1) << ',' << list[i]->test_subject << ',' << format_double(list[i]->f1) << '\n';
            sum += list[i]->f1;
        }
        const double mean = sum / static_cast<double>(list.size());
        double var = 0.0;
        for (const auto* f : list) var += (f->f1 - mean) * (f->f1 - mean);
        const double sd = list.size() > 1 ? std::sqrt(var / static_cast<double>(list.size() - 1)) : 0.0;
        out << s << ",mean,," << format_double(mean) << '\n';
        out << s << ",std,," << format_double(sd) << '\n';
    }
}

}  // namespace vimu::eval

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv_util.hpp"
#include "vimu/error.hpp"
#include "vimu/io.hpp"

namespace vimu::io {

namespace {

const std::vector<std::string> kImuHeader = {"t", "ax", "ay", "az", "gx", "gy", "gz"};

std::string expected_header() { return "t,ax,ay,az,gx,gy,gz"; }

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

ImuSeries read_imu_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open IMU file '" + path + "'");

    ImuSeries series;
    bool have_meta = false;
    bool have_header = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto fields = detail::parse_key_values(line.substr(1));
            if (fields.count("frame") || fields.count("rate")) {
                if (!fields.count("frame") || !fields.count("rate")) {
                    throw FormatError(path + ": comment must declare both frame= and rate=", line_no);
                }
                series.frame = frame_tag_from_string(fields["frame"]);
                series.sample_rate = detail::parse_double(fields["rate"], path, line_no);
                if (!(series.sample_rate > 0.0)) throw FormatError(path + ": rate must be positive", line_no);
                have_meta = true;
            }
            continue;
        }
        if (!have_header) {
            if (detail::split_csv(line) != kImuHeader) {
                throw FormatError(path + ": expected header '" + expected_header() + "', found '" + line + "'",
                                  line_no);
            }
            have_header = true;
            continue;
        }
        auto cells = detail::split_csv(line);
        if (cells.size() != kImuHeader.size()) {
            throw FormatError(path + ": expected 7 columns (" + expected_header() + "), found " +
                                  std::to_string(cells.size()),
                              line_no);
        }
        Vec3 a, g;
        for (int k = 0; k < 3; ++k) {
            a[k] = detail::parse_double(cells[1 + k], path, line_no);
            g[k] = detail::parse_double(cells[4 + k], path, line_no);
        }
        series.accel.push_back(a);
        series.gyro.push_back(g);
    }
    if (!have_header) throw FormatError(path + ": missing header '" + expected_header() + "'");
    if (!have_meta) throw FormatError(path + ": missing '# frame=<global|sensor> rate=<Hz>' line");
    return series;
}

void write_imu_csv(const ImuSeries& series, const std::string& path) {
    series.validate();
    if (!(series.sample_rate > 0.0)) throw ConfigError("IMU series needs a positive sample rate");
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write IMU file '" + path + "'");
    out << "# frame=" << to_string(series.frame) << " rate=" << format_double(series.sample_rate) << '\n';
    out << expected_header() << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_double(static_cast<double>(i) / series.sample_rate);
        for (int k = 0; k < 3; ++k) out << ',' << format_double(series.accel[i][k]);
        for (int k = 0; k < 3; ++k) out << ',' << format_double(series.gyro[i][k]);
        out << '\n';
    }
    if (!out) throw FormatError("failed while writing '" + path + "'");
}

}  // namespace vimu::io

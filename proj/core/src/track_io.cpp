#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"
#include "vimu/error.hpp"
#include "vimu/io.hpp"

namespace vimu::io {

using nlohmann::json;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> quaternion_columns(const MotionTrackSet& set, const std::string& region) {
    std::string prefix = set.regions.size() == 1 ? "" : region + "_";
    return {prefix + "qw", prefix + "qx", prefix + "qy", prefix + "qz"};
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path + ": invalid JSON: " + e.what());
    }
}

template <typename T>
T json_field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw FormatError(path + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(path + ": bad field '" + key + "': " + e.what());
    }
}

void check_version(const json& j, int expected, const std::string& path) {
    int version = json_field<int>(j, "version", path);
    if (version != expected) {
        throw FormatError(path + ": unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(expected) + ")");
    }
}

}  // namespace

std::string track_set_stem(const std::string& path) {
    for (const char* suffix : {".tracks.json", ".tracks.csv"}) {
        if (ends_with(path, suffix)) return path.substr(0, path.size() - std::string(suffix).size());
    }
    return path;
}

Quat checked_unit_quaternion(double w, double x, double y, double z, const std::string& where) {
    Quat q(w, x, y, z);
    double norm = q.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-3) {
        std::ostringstream msg;
        msg << where << ": quaternion norm " << norm << " is not within 1e-3 of 1";
        throw FormatError(msg.str());
    }
    q.coeffs() /= norm;
    return q;
}

MotionTrackSet load_track_set(const std::string& path) {
    const std::string stem = track_set_stem(path);
    const std::string manifest_path = stem + ".tracks.json";
    const std::string csv_path = stem + ".tracks.csv";

    json manifest = read_json(manifest_path);
    check_version(manifest, kTrackFormatVersion, manifest_path);

    MotionTrackSet set;
    set.sample_rate = json_field<double>(manifest, "sample_rate", manifest_path);
    set.frame_count = json_field<std::size_t>(manifest, "frame_count", manifest_path);
    if (!(set.sample_rate > 0.0)) throw FormatError(manifest_path + ": sample_rate must be positive");

    json regions = json_field<json>(manifest, "regions", manifest_path);
    if (!regions.is_object() || regions.empty()) throw FormatError(manifest_path + ": 'regions' must be a non-empty object");
    for (const auto& [name, body] : regions.items()) {
        auto tris = json_field<std::vector<std::vector<int>>>(body, "triangles", manifest_path);
        if (tris.size() != 3) {
            throw FormatError(manifest_path + ": region '" + name + "' must list exactly 3 triangles");
        }
        Region r;
        for (std::size_t t = 0; t < 3; ++t) {
            if (tris[t].size() != 3) {
                throw FormatError(manifest_path + ": region '" + name + "' triangle " + std::to_string(t) +
                                  " must have 3 vertex ids");
            }
            for (std::size_t k = 0; k < 3; ++k) r.triangles[t][k] = tris[t][k];
        }
        set.regions.emplace(name, std::move(r));
    }

    std::ifstream in(csv_path);
    if (!in) throw FormatError("cannot open '" + csv_path + "'");
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            detail::strip_cr(line);
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw FormatError(csv_path + ": empty file");
    auto header = detail::split_csv(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) column[header[c]] = c;
    if (header.size() < 2 || header[0] != "frame" || header[1] != "t") {
        throw FormatError(csv_path + ": header must start with 'frame,t'", line_no);
    }

    // Every vertex with an _x column is loaded; region vertices must be present.
    std::set<int> vids;
    for (const auto& name : header) {
        if (ends_with(name, "_x")) {
            std::string id = name.substr(0, name.size() - 2);
            try {
                std::size_t used = 0;
                int vid = std::stoi(id, &used);
                if (used == id.size()) vids.insert(vid);
            } catch (const std::exception&) {
            }
        }
    }
    auto require = [&](const std::string& name) {
        auto it = column.find(name);
        if (it == column.end()) throw FormatError(csv_path + ": missing column '" + name + "'", line_no);
        return it->second;
    };
    std::map<int, std::array<std::size_t, 3>> vcols;
    for (int vid : vids) {
        std::string s = std::to_string(vid);
        vcols[vid] = {require(s + "_x"), require(s + "_y"), require(s + "_z")};
    }
    for (const auto& [name, r] : set.regions) {
        for (int vid : r.vertex_ids()) {
            if (!vids.count(vid)) {
                throw FormatError(csv_path + ": region '" + name + "' vertex " + std::to_string(vid) +
                                  " has no columns");
            }
        }
    }
    std::map<std::string, std::array<std::size_t, 4>> qcols;
    for (const auto& [name, r] : set.regions) {
        auto names = quaternion_columns(set, name);
        qcols[name] = {require(names[0]), require(names[1]), require(names[2]), require(names[3])};
    }
    std::optional<std::size_t> conf_col;
    if (column.count("conf")) conf_col = column["conf"];

    for (int vid : vids) set.vertices[vid].reserve(set.frame_count);
    if (conf_col) set.confidence.emplace().reserve(set.frame_count);

    std::size_t frame = 0;
    while (next_line()) {
        if (frame >= set.frame_count) {
            throw FormatError(csv_path + ": more rows than frame_count " + std::to_string(set.frame_count),
                              line_no);
        }
        auto cells = detail::split_csv(line);
        if (cells.size() != header.size()) {
            throw FormatError(csv_path + ": truncated row (" + std::to_string(cells.size()) + " of " +
                                  std::to_string(header.size()) + " cells)",
                              line_no);
        }
        auto num = [&](std::size_t c) { return detail::parse_double(cells[c], csv_path, line_no); };
        for (const auto& [vid, cols] : vcols) set.vertices[vid].emplace_back(num(cols[0]), num(cols[1]), num(cols[2]));
        for (auto& [name, r] : set.regions) {
            const auto& c = qcols[name];
            r.orientation.push_back(checked_unit_quaternion(
                num(c[0]), num(c[1]), num(c[2]), num(c[3]),
                csv_path + ": region '" + name + "' frame " + std::to_string(frame)));
        }
        if (conf_col) set.confidence->push_back(num(*conf_col));
        ++frame;
    }
    if (frame != set.frame_count) {
        throw FormatError(csv_path + ": truncated file: " + std::to_string(frame) + " rows, manifest declares " +
                          std::to_string(set.frame_count));
    }
    set.validate();
    return set;
}

void store_track_set(const MotionTrackSet& set, const std::string& path) {
    set.validate();
    const std::string stem = track_set_stem(path);

    json manifest;
    manifest["version"] = kTrackFormatVersion;
    manifest["sample_rate"] = set.sample_rate;
    manifest["frame_count"] = set.frame_count;
    json regions = json::object();
    for (const auto& [name, r] : set.regions) {
        json tris = json::array();
        for (const auto& t : r.triangles) tris.push_back({t[0], t[1], t[2]});
        regions[name] = {{"triangles", tris}};
    }
    manifest["regions"] = regions;

    std::ofstream mout(stem + ".tracks.json");
    if (!mout) throw FormatError("cannot write '" + stem + ".tracks.json'");
    mout << manifest.dump(2) << '\n';

    std::ofstream out(stem + ".tracks.csv");
    if (!out) throw FormatError("cannot write '" + stem + ".tracks.csv'");
    out << "frame,t";
    for (const auto& [vid, track] : set.vertices) out << ',' << vid << "_x," << vid << "_y," << vid << "_z";
    for (const auto& [name, r] : set.regions)
        for (const auto& c : quaternion_columns(set, name)) out << ',' << c;
    if (set.confidence) out << ",conf";
    out << '\n';
    for (std::size_t f = 0; f < set.frame_count; ++f) {
        out << f << ',' << format_double(static_cast<double>(f) / set.sample_rate);
        for (const auto& [vid, track] : set.vertices)
            for (int k = 0; k < 3; ++k) out << ',' << format_double(track[f][k]);
        for (const auto& [name, r] : set.regions) {
            const Quat& q = r.orientation[f];
            out << ',' << format_double(q.w()) << ',' << format_double(q.x()) << ',' << format_double(q.y())
                << ',' << format_double(q.z());
        }
        if (set.confidence) out << ',' << format_double((*set.confidence)[f]);
        out << '\n';
    }
    if (!out) throw FormatError("failed while writing '" + stem + ".tracks.csv'");
}

SensorSpec load_sensor_spec(const std::string& path) {
    json j = read_json(path);
    check_version(j, kSensorSpecVersion, path);
    SensorSpec spec;
    spec.region = json_field<std::string>(j, "region", path);
    spec.sample_rate = json_field<double>(j, "sample_rate", path);

    json rot = json_field<json>(j, "rotation", path);
    if (rot.contains("quat")) {
        auto q = json_field<std::vector<double>>(rot, "quat", path);
        if (q.size() != 4) throw FormatError(path + ": rotation.quat must have 4 entries [w,x,y,z]");
        spec.sensor_to_bone = checked_unit_quaternion(q[0], q[1], q[2], q[3], path).toRotationMatrix();
    } else if (rot.contains("matrix")) {
        auto m = json_field<std::vector<std::vector<double>>>(rot, "matrix", path);
        if (m.size() != 3) throw FormatError(path + ": rotation.matrix must be 3x3");
        for (int r = 0; r < 3; ++r) {
            if (m[r].size() != 3) throw FormatError(path + ": rotation.matrix must be 3x3");
            for (int c = 0; c < 3; ++c) spec.sensor_to_bone(r, c) = m[r][c];
        }
    } else {
        throw FormatError(path + ": rotation needs 'quat' or 'matrix'");
    }

    if (j.contains("gravity")) {
        auto g = json_field<std::vector<double>>(j, "gravity", path);
        if (g.size() != 3) throw FormatError(path + ": gravity must have 3 entries");
        spec.gravity = Vec3(g[0], g[1], g[2]);
    }
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw FormatError(path + ": " + e.what());
    }
    return spec;
}

void store_sensor_spec(const SensorSpec& spec, const std::string& path) {
    spec.validate();
    Quat q(spec.sensor_to_bone);
    json j;
    j["version"] = kSensorSpecVersion;
    j["region"] = spec.region;
    j["rotation"] = {{"quat", {q.w(), q.x(), q.y(), q.z()}}};
    j["gravity"] = {spec.gravity.x(), spec.gravity.y(), spec.gravity.z()};
    j["sample_rate"] = spec.sample_rate;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace vimu::io

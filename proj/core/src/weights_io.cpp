#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vimu/simnet.hpp"

namespace vimu::simnet {

using nlohmann::json;

namespace {

std::string weights_stem(const std::string& path) {
    for (const char* suffix : {".json", ".bin"}) {
        const std::string s(suffix);
        if (path.size() > s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0) {
            return path.substr(0, path.size() - s.size());
        }
    }
    return path;
}

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
}

void write_doubles(std::ofstream& out, const Vector& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
}

void read_doubles(std::ifstream& in, Vector& values, const std::string& path) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw FormatError(path + ": weight blob is truncated");
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes, 8);
        values[i] = std::bit_cast<double>(to_little_endian(bits));
    }
}

json network_to_json(const NetworkConfig& c) {
    return {{"input_dim", c.input_dim()},
            {"append_orientation", c.append_orientation},
            {"conv_channels", c.conv_channels},
            {"kernel", c.kernel},
            {"lstm_hidden", c.lstm_hidden},
            {"output_dim", NetworkConfig::kOutputDim}};
}

NetworkConfig network_from_json(const json& j) {
    NetworkConfig c;
    c.append_orientation = j.at("append_orientation").get<bool>();
    c.conv_channels = j.at("conv_channels").get<std::array<int, 3>>();
    c.kernel = j.at("kernel").get<int>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::array<int, 2>>();
    if (j.at("input_dim").get<int>() != c.input_dim() || j.at("output_dim").get<int>() != NetworkConfig::kOutputDim) {
        throw FormatError("network config dimensions are inconsistent");
    }
    return c;
}

json training_to_json(const TrainConfig& t) {
    return {{"window_seconds", t.window_seconds}, {"overlap", t.overlap},     {"batch_size", t.batch_size},
            {"epochs", t.epochs},                 {"learning_rate", t.learning_rate}, {"beta1", t.beta1},
            {"beta2", t.beta2},                   {"epsilon", t.epsilon},     {"seed", t.seed},
            {"loss", "mse"},                      {"optimizer", "adam"}};
}

TrainConfig training_from_json(const json& j, const NetworkConfig& network) {
    TrainConfig t;
    t.window_seconds = j.at("window_seconds").get<double>();
    t.overlap = j.at("overlap").get<double>();
    t.batch_size = j.at("batch_size").get<std::size_t>();
    t.epochs = j.at("epochs").get<std::size_t>();
    t.learning_rate = j.at("learning_rate").get<double>();
    t.beta1 = j.at("beta1").get<double>();
    t.beta2 = j.at("beta2").get<double>();
    t.epsilon = j.at("epsilon").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.network = network;
    return t;
}

}  // namespace

void save_weights(const WeightBundle& weights, const std::string& path) {
    weights.validate();
    const std::string stem = weights_stem(path);
    const std::string blob_name = std::filesystem::path(stem + ".bin").filename().string();

    json manifest;
    manifest["format_version"] = kWeightFormatVersion;
    manifest["target"] = to_string(weights.target);
    manifest["seed"] = weights.seed;
    manifest["dtype"] = "float64";
    manifest["byte_order"] = "little";
    manifest["layout"] = "row-major";
    manifest["config"] = network_to_json(weights.config);
    json params = json::array();
    for (const auto& p : weights.layout()) params.push_back({{"name", p.name}, {"shape", p.shape}});
    manifest["parameters"] = params;
    const auto dim = static_cast<std::size_t>(weights.config.input_dim());
    manifest["buffers"] = json::array({{{"name", "input_mean"}, {"shape", {dim}}}, {{"name", "input_std"}, {"shape", {dim}}}});
    manifest["blob"] = blob_name;
    manifest["blob_bytes"] = 8 * (static_cast<std::size_t>(weights.params.size()) + 2 * dim);
    if (weights.trained_with) manifest["training"] = training_to_json(*weights.trained_with);

    std::ofstream mout(stem + ".json");
    if (!mout) throw FormatError("cannot write '" + stem + ".json'");
    mout << manifest.dump(2) << '\n';

    std::ofstream bout(stem + ".bin", std::ios::binary);
    if (!bout) throw FormatError("cannot write '" + stem + ".bin'");
    write_doubles(bout, weights.params);
    write_doubles(bout, weights.input_mean);
    write_doubles(bout, weights.input_std);
    if (!bout) throw FormatError("failed while writing '" + stem + ".bin'");
}

WeightBundle load_weights(const std::string& path) {
    const std::string stem = weights_stem(path);
    const std::string manifest_path = stem + ".json";
    std::ifstream min(manifest_path);
    if (!min) throw FormatError("cannot open weight manifest '" + manifest_path + "'");

    WeightBundle w;
    std::string blob_path;
    try {
        json manifest = json::parse(min);
        w.version = manifest.at("format_version").get<int>();
        if (w.version != kWeightFormatVersion) {
            throw FormatError(manifest_path + ": unsupported weight format version " + std::to_string(w.version));
        }
        if (manifest.at("dtype") != "float64" || manifest.at("byte_order") != "little") {
            throw FormatError(manifest_path + ": only little-endian float64 blobs are supported");
        }
        w.target = target_from_string(manifest.at("target").get<std::string>());
        w.seed = manifest.at("seed").get<std::uint64_t>();
        w.config = network_from_json(manifest.at("config"));
        if (manifest.contains("training")) w.trained_with = training_from_json(manifest.at("training"), w.config);

        const auto layout = parameter_layout(w.config);
        const auto& listed = manifest.at("parameters");
        if (listed.size() != layout.size()) throw FormatError(manifest_path + ": parameter list does not match config");
        for (std::size_t i = 0; i < layout.size(); ++i) {
            if (listed[i].at("name").get<std::string>() != layout[i].name ||
                listed[i].at("shape").get<std::vector<std::size_t>>() != layout[i].shape) {
                throw FormatError(manifest_path + ": parameter '" + layout[i].name + "' does not match config");
            }
        }
        blob_path = (std::filesystem::path(manifest_path).parent_path() / manifest.at("blob").get<std::string>()).string();
    } catch (const json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }

    w.params.resize(static_cast<Eigen::Index>(parameter_count(w.config)));
    w.input_mean.resize(w.config.input_dim());
    w.input_std.resize(w.config.input_dim());
    std::ifstream bin(blob_path, std::ios::binary);
    if (!bin) throw FormatError("cannot open weight blob '" + blob_path + "'");
    read_doubles(bin, w.params, blob_path);
    read_doubles(bin, w.input_mean, blob_path);
    read_doubles(bin, w.input_std, blob_path);
    if (bin.peek() != std::char_traits<char>::eof()) throw FormatError(blob_path + ": trailing bytes in weight blob");
    w.validate();
    return w;
}

}  // namespace vimu::simnet

#include "vimu/bvh.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vimu/error.hpp"

namespace vimu::bvh {

namespace {

struct Token {
    std::string_view text;
    std::size_t line;
};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_words(std::string_view line) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) words.push_back(line.substr(i, j - i));
        i = j;
    }
    return words;
}

double parse_number(std::string_view word, std::size_t line) {
    double value = 0.0;
    const char* first = word.data();
    const char* last = word.data() + word.size();
    if (!word.empty() && word.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw FormatError("expected a number, found '" + std::string(word) + "'", line);
    }
    return value;
}

std::size_t parse_count(std::string_view word, std::size_t line) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
    if (ec != std::errc{} || ptr != word.data() + word.size()) {
        throw FormatError("expected a non-negative integer, found '" + std::string(word) + "'", line);
    }
    return value;
}

Channel parse_channel(std::string_view word, std::size_t line) {
    if (word == "Xposition") return Channel::x_position;
    if (word == "Yposition") return Channel::y_position;
    if (word == "Zposition") return Channel::z_position;
    if (word == "Xrotation") return Channel::x_rotation;
    if (word == "Yrotation") return Channel::y_rotation;
    if (word == "Zrotation") return Channel::z_rotation;
    throw FormatError("unknown channel keyword '" + std::string(word) + "'", line);
}

class HierarchyParser {
public:
    explicit HierarchyParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    std::vector<Joint> parse() {
        expect("HIERARCHY");
        if (!at_end() && peek().text != "ROOT") {
            throw FormatError("expected ROOT, found '" + std::string(peek().text) + "'", peek().line);
        }
        while (!at_end() && peek().text == "ROOT") {
            if (!joints_.empty()) throw FormatError("more than one ROOT joint", peek().line);
            next();
            parse_joint(std::nullopt, false);
        }
        if (joints_.empty()) throw FormatError("missing ROOT joint", last_line());
        if (!at_end()) {
            throw FormatError("unexpected token '" + std::string(peek().text) + "' after hierarchy",
                              peek().line);
        }
        return std::move(joints_);
    }

private:
    bool at_end() const { return pos_ >= tokens_.size(); }
    std::size_t last_line() const { return tokens_.empty() ? 1 : tokens_.back().line; }

    const Token& peek() const {
        if (at_end()) throw FormatError("unexpected end of hierarchy", last_line());
        return tokens_[pos_];
    }
    const Token& next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }
    void expect(std::string_view word) {
        const Token& t = next();
        if (t.text != word) {
            throw FormatError("expected '" + std::string(word) + "', found '" + std::string(t.text) + "'",
                              t.line);
        }
    }

    void parse_joint(std::optional<std::size_t> parent, bool end_site) {
        Joint joint;
        joint.parent = parent;
        joint.end_site = end_site;
        if (end_site) {
            expect("Site");
            joint.name = joints_[*parent].name + "_end";
        } else {
            joint.name = std::string(next().text);
        }
        expect("{");
        expect("OFFSET");
        for (int k = 0; k < 3; ++k) {
            const Token& t = next();
            joint.offset[k] = parse_number(t.text, t.line);
        }
        if (!end_site) {
            const Token& kw = next();
            if (kw.text != "CHANNELS") {
                throw FormatError("expected CHANNELS, found '" + std::string(kw.text) + "'", kw.line);
            }
            const Token& n = next();
            std::size_t count = parse_count(n.text, n.line);
            if (count > 6) throw FormatError("a joint may declare at most 6 channels", n.line);
            for (std::size_t c = 0; c < count; ++c) {
                const Token& t = next();
                joint.channels.push_back(parse_channel(t.text, t.line));
            }
        }
        std::size_t index = joints_.size();
        joints_.push_back(std::move(joint));
        while (true) {
            const Token& t = next();
            if (t.text == "}") break;
            if (end_site) {
                throw FormatError("End Site may only contain an OFFSET", t.line);
            } else if (t.text == "JOINT") {
                parse_joint(index, false);
            } else if (t.text == "End") {
                parse_joint(index, true);
            } else {
                throw FormatError("unexpected token '" + std::string(t.text) + "' in joint body", t.line);
            }
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<Joint> joints_;
};

void assign_channel_offsets(std::vector<Joint>& joints) {
    std::size_t offset = 0;
    for (Joint& j : joints) {
        j.channel_offset = offset;
        offset += j.channels.size();
    }
}

void append_number(std::string& out, double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, ptr);
}

Mat3 axis_rotation(Channel c, double degrees) {
    double rad = degrees * std::numbers::pi / 180.0;
    switch (c) {
        case Channel::x_rotation: return Eigen::AngleAxisd(rad, Vec3::UnitX()).toRotationMatrix();
        case Channel::y_rotation: return Eigen::AngleAxisd(rad, Vec3::UnitY()).toRotationMatrix();
        case Channel::z_rotation: return Eigen::AngleAxisd(rad, Vec3::UnitZ()).toRotationMatrix();
        default: return Mat3::Identity();
    }
}

struct Transform {
    Vec3 position;
    Mat3 rotation;
};

std::vector<Transform> global_transforms(const SkeletonAnimation& anim, std::size_t frame) {
    const std::vector<double>& row = anim.frames[frame];
    std::vector<Transform> out(anim.joints.size());
    for (std::size_t j = 0; j < anim.joints.size(); ++j) {
        const Joint& joint = anim.joints[j];
        Vec3 translation = joint.offset;
        Mat3 rotation = Mat3::Identity();
        for (std::size_t c = 0; c < joint.channels.size(); ++c) {
            double v = row[joint.channel_offset + c];
            switch (joint.channels[c]) {
                case Channel::x_position: translation.x() += v; break;
                case Channel::y_position: translation.y() += v; break;
                case Channel::z_position: translation.z() += v; break;
                default: rotation = rotation * axis_rotation(joint.channels[c], v); break;
            }
        }
        if (joint.parent) {
            const Transform& p = out[*joint.parent];
            out[j].position = p.position + p.rotation * translation;
            out[j].rotation = p.rotation * rotation;
        } else {
            out[j].position = translation;
            out[j].rotation = rotation;
        }
    }
    return out;
}

}  // namespace

const char* to_string(Channel c) {
    switch (c) {
        case Channel::x_position: return "Xposition";
        case Channel::y_position: return "Yposition";
        case Channel::z_position: return "Zposition";
        case Channel::x_rotation: return "Xrotation";
        case Channel::y_rotation: return "Yrotation";
        case Channel::z_rotation: return "Zrotation";
    }
    return "?";
}

std::size_t SkeletonAnimation::channel_count() const {
    std::size_t n = 0;
    for (const Joint& j : joints) n += j.channels.size();
    return n;
}

std::optional<std::size_t> SkeletonAnimation::find_joint(std::string_view name) const {
    for (std::size_t i = 0; i < joints.size(); ++i)
        if (joints[i].name == name) return i;
    return std::nullopt;
}

void SkeletonAnimation::validate() const {
    if (joints.empty() || joints.front().parent) throw FormatError("animation must start with a root joint");
    for (std::size_t i = 1; i < joints.size(); ++i) {
        if (!joints[i].parent) throw FormatError("animation has more than one root joint");
        if (*joints[i].parent >= i) {
            throw FormatError("joint '" + joints[i].name + "' is declared before its parent");
        }
    }
    if (!(frame_time > 0.0)) throw FormatError("frame time must be positive");
    if (frames.size() != frame_count) {
        throw FormatError("declared " + std::to_string(frame_count) + " frames but found " +
                          std::to_string(frames.size()));
    }
    std::size_t n = channel_count();
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].size() != n) {
            throw FormatError("frame " + std::to_string(f) + " has " + std::to_string(frames[f].size()) +
                              " values, expected " + std::to_string(n));
        }
    }
}

SkeletonAnimation parse_bvh(std::string_view text) {
    auto lines = split_lines(text);

    std::vector<Token> tokens;
    std::size_t motion_line = 0;
    for (std::size_t i = 0; i < lines.size() && motion_line == 0; ++i) {
        for (std::string_view w : split_words(lines[i])) {
            if (w == "MOTION") {
                motion_line = i + 1;
                break;
            }
            tokens.push_back({w, i + 1});
        }
    }
    if (motion_line == 0) throw FormatError("missing MOTION section", lines.size());

    SkeletonAnimation anim;
    anim.joints = HierarchyParser(std::move(tokens)).parse();
    assign_channel_offsets(anim.joints);
    const std::size_t channels = anim.channel_count();

    // Header lines: "Frames: N" and "Frame Time: dt".
    std::size_t i = motion_line;
    auto next_content_line = [&]() -> std::size_t {
        while (i < lines.size() && split_words(lines[i]).empty()) ++i;
        if (i >= lines.size()) throw FormatError("truncated MOTION header", lines.size());
        return i++;
    };
    {
        std::size_t ln = next_content_line();
        auto w = split_words(lines[ln]);
        if (w.size() != 2 || w[0] != "Frames:") throw FormatError("expected 'Frames: <count>'", ln + 1);
        anim.frame_count = parse_count(w[1], ln + 1);
    }
    {
        std::size_t ln = next_content_line();
        auto w = split_words(lines[ln]);
        if (w.size() != 3 || w[0] != "Frame" || w[1] != "Time:") {
            throw FormatError("expected 'Frame Time: <seconds>'", ln + 1);
        }
        anim.frame_time = parse_number(w[2], ln + 1);
        if (!(anim.frame_time > 0.0)) throw FormatError("frame time must be positive", ln + 1);
    }

    anim.frames.reserve(anim.frame_count);
    for (; i < lines.size(); ++i) {
        auto words = split_words(lines[i]);
        if (words.empty()) continue;
        if (anim.frames.size() == anim.frame_count) {
            throw FormatError("more frame rows than the declared " + std::to_string(anim.frame_count), i + 1);
        }
        if (words.size() != channels) {
            throw FormatError("frame row has " + std::to_string(words.size()) + " values but " +
                                  std::to_string(channels) + " channels are declared",
                              i + 1);
        }
        std::vector<double> row;
        row.reserve(channels);
        for (std::string_view w : words) row.push_back(parse_number(w, i + 1));
        anim.frames.push_back(std::move(row));
    }
    if (anim.frames.size() != anim.frame_count) {
        throw FormatError("declared " + std::to_string(anim.frame_count) + " frames but found " +
                              std::to_string(anim.frames.size()),
                          lines.size());
    }
    return anim;
}

SkeletonAnimation load_bvh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open BVH file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_bvh(buf.str());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::string serialize_bvh(const SkeletonAnimation& anim) {
    anim.validate();
    std::string out = "HIERARCHY\n";

    // Children lists keep declaration order.
    std::vector<std::vector<std::size_t>> children(anim.joints.size());
    for (std::size_t j = 1; j < anim.joints.size(); ++j) children[*anim.joints[j].parent].push_back(j);

    auto write_joint = [&](auto&& self, std::size_t j, int depth) -> void {
        const Joint& joint = anim.joints[j];
        std::string indent(static_cast<std::size_t>(depth), '\t');
        if (joint.end_site) {
            out += indent + "End Site\n";
        } else {
            out += indent + (joint.parent ? "JOINT " : "ROOT ") + joint.name + "\n";
        }
        out += indent + "{\n";
        out += indent + "\tOFFSET";
        for (int k = 0; k < 3; ++k) {
            out += ' ';
            append_number(out, joint.offset[k]);
        }
        out += '\n';
        if (!joint.end_site) {
            out += indent + "\tCHANNELS " + std::to_string(joint.channels.size());
            for (Channel c : joint.channels) out += std::string(" ") + to_string(c);
            out += '\n';
        }
        for (std::size_t c : children[j]) self(self, c, depth + 1);
        out += indent + "}\n";
    };
    write_joint(write_joint, 0, 0);

    out += "MOTION\n";
    out += "Frames: " + std::to_string(anim.frame_count) + "\n";
    out += "Frame Time: ";
    append_number(out, anim.frame_time);
    out += '\n';
    for (const auto& row : anim.frames) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ' ';
            append_number(out, row[k]);
        }
        out += '\n';
    }
    return out;
}

std::vector<JointPose> forward_kinematics(const SkeletonAnimation& anim, std::size_t frame) {
    if (frame >= anim.frames.size()) {
        throw ConfigError("frame " + std::to_string(frame) + " out of range (animation has " +
                          std::to_string(anim.frames.size()) + " frames)");
    }
    auto transforms = global_transforms(anim, frame);
    std::vector<JointPose> poses;
    poses.reserve(transforms.size());
    for (const Transform& t : transforms) poses.push_back({t.position, Quat(t.rotation).normalized()});
    return poses;
}

JointTrack joint_track(const SkeletonAnimation& anim, std::size_t joint, double length_scale) {
    if (joint >= anim.joints.size()) throw ConfigError("joint index out of range");
    JointTrack track;
    track.sample_rate = 1.0 / anim.frame_time;
    track.positions.reserve(anim.frames.size());
    track.orientations.reserve(anim.frames.size());
    for (std::size_t f = 0; f < anim.frames.size(); ++f) {
        auto transforms = global_transforms(anim, f);
        track.positions.push_back(transforms[joint].position * length_scale);
        track.orientations.push_back(transforms[joint].rotation);
    }
    return track;
}

}  // namespace vimu::bvh

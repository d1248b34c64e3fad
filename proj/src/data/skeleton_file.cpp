#include "lsta/data/skeleton_file.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

namespace lsta::data {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::vector<std::string> next(const char* what)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++number_;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) tokens.push_back(t);
            if (!tokens.empty()) return tokens;
        }
        throw SkeletonParseError(number_ + 1, std::string("unexpected end of file, expected ") + what);
    }

    std::size_t line() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

double to_double(const std::string& token, std::size_t line)
{
    double value = 0.0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw SkeletonParseError(line, "non-numeric value '" + token + "'");
    }
    return value;
}

std::size_t to_count(const std::vector<std::string>& tokens, std::size_t line, const char* what)
{
    if (tokens.size() != 1) throw SkeletonParseError(line, std::string("expected a single ") + what);
    std::size_t value = 0;
    const auto& t = tokens.front();
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw SkeletonParseError(line, std::string("invalid ") + what + " '" + t + "'");
    }
    return value;
}

} // namespace

SkeletonSequence parse_skeleton(std::istream& in, std::size_t joint_count)
{
    LineReader reader(in);
    SkeletonSequence seq;
    const std::size_t frames = to_count(reader.next("frame count"), reader.line(), "frame count");
    seq.frames.resize(frames);
    for (auto& frame : seq.frames) {
        const std::size_t bodies = to_count(reader.next("body count"), reader.line(), "body count");
        frame.bodies.resize(bodies);
        for (auto& body : frame.bodies) {
            auto info = reader.next("body info line");
            if (info.size() != 10) {
                throw SkeletonParseError(reader.line(), "body info line needs 10 fields, found " +
                                                            std::to_string(info.size()));
            }
            body.id = info.front();
            body.info.assign(info.begin() + 1, info.end());
            const std::size_t joints = to_count(reader.next("joint count"), reader.line(), "joint count");
            if (joints != joint_count) {
                throw SkeletonParseError(reader.line(), "expected " + std::to_string(joint_count) +
                                                            " joints, found " + std::to_string(joints));
            }
            body.joints.resize(joints);
            for (auto& joint : body.joints) {
                auto fields = reader.next("joint line");
                if (fields.size() != 11 && fields.size() != 12) {
                    throw SkeletonParseError(reader.line(), "joint line needs 11 or 12 fields, found " +
                                                                std::to_string(fields.size()));
                }
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    const double v = to_double(fields[i], reader.line());
                    if (i < 3) joint[i] = v;
                }
            }
        }
    }
    return seq;
}

SkeletonSequence load_skeleton_file(const std::string& path, std::size_t joint_count)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open skeleton file " + path);
    try {
        auto seq = parse_skeleton(in, joint_count);
        seq.sample_id = std::filesystem::path(path).stem().string();
        seq.label = label_from_ntu_name(seq.sample_id);
        return seq;
    } catch (const SkeletonParseError& e) {
        throw SkeletonParseError(e.line(), e.message(), path);
    }
}

void write_skeleton(std::ostream& out, const SkeletonSequence& seq)
{
    out << std::setprecision(9);
    out << seq.frames.size() << '\n';
    for (const auto& frame : seq.frames) {
        out << frame.bodies.size() << '\n';
        for (const auto& body : frame.bodies) {
            out << (body.id.empty() ? "0" : body.id);
            for (std::size_t i = 0; i < 9; ++i) out << ' ' << (i < body.info.size() ? body.info[i] : "0");
            out << '\n' << body.joints.size() << '\n';
            for (const auto& j : body.joints) {
                out << j[0] << ' ' << j[1] << ' ' << j[2];
                for (int i = 0; i < 9; ++i) out << " 0";
                out << '\n';
            }
        }
    }
}

std::optional<int> label_from_ntu_name(const std::string& name)
{
    static const std::regex pattern("A(\\d{3})");
    std::smatch m;
    if (!std::regex_search(name, m, pattern)) return std::nullopt;
    const int action = std::stoi(m[1].str());
    if (action < 1) return std::nullopt;
    return action - 1;
}

} // namespace lsta::data

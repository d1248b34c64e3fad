#pragma once

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsta::data {

class SkeletonParseError : public std::runtime_error {
public:
    SkeletonParseError(std::size_t line, const std::string& message, const std::string& source = {})
        : std::runtime_error((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + message),
          line_(line), message_(message)
    {
    }
    std::size_t line() const { return line_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

using Joint = std::array<double, 3>;

struct Body {
    std::string id;
    /// The nine tracking fields following the id, kept verbatim.
    std::vector<std::string> info;
    std::vector<Joint> joints;
};

struct Frame {
    std::vector<Body> bodies;
};

struct SkeletonSequence {
    std::vector<Frame> frames;
    std::optional<int> label;
    std::string sample_id;
};

/// NTU RGB+D .skeleton text. Joint lines carry 11 or 12 numeric fields of
/// which the first three (x, y, z) are kept.
SkeletonSequence parse_skeleton(std::istream& in, std::size_t joint_count = 25);
SkeletonSequence load_skeleton_file(const std::string& path, std::size_t joint_count = 25);

/// Writes the same layout; discarded joint fields are written as zeros.
void write_skeleton(std::ostream& out, const SkeletonSequence& seq);

/// Action label from an NTU file name such as S001C002P003R002A013
/// (0-based, so A013 -> 12); nullopt when the name has no A### field.
std::optional<int> label_from_ntu_name(const std::string& name);

} // namespace lsta::data

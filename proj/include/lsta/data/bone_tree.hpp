#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace lsta::data {

/// Spanning tree over the joints, stored as each joint's parent on the way
/// to the center. The center is its own parent (a zero bone).
class BoneTree {
public:
    BoneTree(std::size_t center, std::vector<std::pair<std::size_t, std::size_t>> child_parent);

    /// "child parent" lines with 1-based joint numbers; '#' comments.
    static BoneTree parse(std::istream& in);
    static BoneTree load(const std::string& path);
    /// The standard 25-joint NTU tree (same as config/ntu_bone_tree.txt).
    static BoneTree ntu_rgbd();

    std::size_t center() const { return center_; }
    std::size_t vertex_count() const { return parent_.size(); }
    std::size_t parent(std::size_t joint) const { return parent_.at(joint); }
    /// Joints from the center out to `joint`, inclusive at both ends.
    std::vector<std::size_t> path_from_center(std::size_t joint) const;
    /// Joints that are no joint's parent.
    std::vector<std::size_t> leaves() const;

private:
    std::size_t center_;
    std::vector<std::size_t> parent_;
};

} // namespace lsta::data

#include "lsta/data/bone_tree.hpp"

#include <algorithm>
#include <optional>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsta::data {

BoneTree::BoneTree(std::size_t center, std::vector<std::pair<std::size_t, std::size_t>> child_parent)
    : center_(center)
{
    const std::size_t v = child_parent.size();
    if (center >= v) throw std::invalid_argument("bone tree: center outside the joint range");
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    parent_.assign(v, unset);
    for (auto [child, parent] : child_parent) {
        if (child >= v || parent >= v) throw std::invalid_argument("bone tree: joint index out of range");
        if (parent_[child] != unset) {
            throw std::invalid_argument("bone tree: joint " + std::to_string(child) + " has two parents");
        }
        parent_[child] = parent;
    }
    if (parent_[center] != center) throw std::invalid_argument("bone tree: the center must be its own parent");
    for (std::size_t j = 0; j < v; ++j) {
        std::size_t cur = j;
        for (std::size_t steps = 0; cur != center; ++steps) {
            if (steps > v || parent_[cur] == cur) {
                throw std::invalid_argument("bone tree: joint " + std::to_string(j) + " does not reach the center");
            }
            cur = parent_[cur];
        }
    }
}

BoneTree BoneTree::parse(std::istream& in)
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::optional<std::size_t> center;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        long long child = 0, parent = 0;
        if (!(ss >> child)) continue;
        std::string rest;
        if (!(ss >> parent) || (ss >> rest) || child < 1 || parent < 1) {
            throw std::invalid_argument("bone tree line " + std::to_string(number) +
                                        ": expected two 1-based joint numbers");
        }
        pairs.emplace_back(child - 1, parent - 1);
        if (child == parent) {
            if (center) throw std::invalid_argument("bone tree: more than one self-paired center");
            center = child - 1;
        }
    }
    if (!center) throw std::invalid_argument("bone tree: no center (a joint paired with itself)");
    return BoneTree(*center, std::move(pairs));
}

BoneTree BoneTree::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bone tree " + path);
    return parse(in);
}

BoneTree BoneTree::ntu_rgbd()
{
    static constexpr std::pair<int, int> pairs[] = {
        {1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},   {7, 6},   {8, 7},   {9, 21},
        {10, 9},  {11, 10}, {12, 11}, {13, 1},  {14, 13}, {15, 14}, {16, 15}, {17, 1},  {18, 17},
        {19, 18}, {20, 19}, {21, 21}, {22, 23}, {23, 8},  {24, 25}, {25, 12}};
    std::vector<std::pair<std::size_t, std::size_t>> zero_based;
    for (auto [c, p] : pairs) zero_based.emplace_back(c - 1, p - 1);
    return BoneTree(20, std::move(zero_based));
}

std::vector<std::size_t> BoneTree::path_from_center(std::size_t joint) const
{
    std::vector<std::size_t> path{joint};
    while (path.back() != center_) path.push_back(parent_.at(path.back()));
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::size_t> BoneTree::leaves() const
{
    std::vector<bool> is_parent(parent_.size(), false);
    for (std::size_t j = 0; j < parent_.size(); ++j) {
        if (j != center_) is_parent[parent_[j]] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < parent_.size(); ++j) {
        if (!is_parent[j]) out.push_back(j);
    }
    return out;
}

} // namespace lsta::data

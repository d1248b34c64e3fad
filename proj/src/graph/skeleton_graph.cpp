#include "lsta/graph/skeleton_graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lsta::graph {

SkeletonGraph::SkeletonGraph(std::size_t vertex_count, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : vertex_count_(vertex_count)
{
    if (vertex_count == 0) throw std::invalid_argument("SkeletonGraph: vertex count must be positive");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto [i, j] : edges) {
        if (i >= vertex_count || j >= vertex_count) {
            throw std::invalid_argument("SkeletonGraph: edge (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") outside [0," + std::to_string(vertex_count) + ")");
        }
        if (i == j) throw std::invalid_argument("SkeletonGraph: self-loop on vertex " + std::to_string(i));
        auto key = std::minmax(i, j);
        if (seen.insert({key.first, key.second}).second) edges_.emplace_back(key.first, key.second);
    }
}

SkeletonGraph SkeletonGraph::from_edge_list(std::istream& in, std::size_t vertex_count)
{
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        long long i = -1, j = -1;
        std::string extra;
        if (!(ls >> i >> j) || (ls >> extra) || i < 0 || j < 0) {
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected \"i j\"");
        }
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        max_index = std::max({max_index, static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    }
    if (vertex_count == 0) vertex_count = edges.empty() ? 1 : max_index + 1;
    return SkeletonGraph(vertex_count, std::move(edges));
}

SkeletonGraph SkeletonGraph::ntu_rgbd()
{
    // 1-based joint pairs of the Kinect v2 body model.
    static constexpr std::pair<int, int> pairs[] = {
        {1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},   {7, 6},   {8, 7},
        {9, 21},  {10, 9},  {11, 10}, {12, 11}, {13, 1},  {14, 13}, {15, 14}, {16, 15},
        {17, 1},  {18, 17}, {19, 18}, {20, 19}, {22, 8},  {23, 8},  {24, 12}, {25, 12}};
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (auto [a, b] : pairs) edges.emplace_back(a - 1, b - 1);
    return SkeletonGraph(25, std::move(edges));
}

Eigen::MatrixXd SkeletonGraph::adjacency() const
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(vertex_count_, vertex_count_);
    for (auto [i, j] : edges_) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

Eigen::MatrixXd SkeletonGraph::adjacency_with_self_loops() const
{
    Eigen::MatrixXd a = adjacency();
    a.diagonal().setOnes();
    return a;
}

DistanceMatrix bfs_distances(const SkeletonGraph& g)
{
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (auto [i, j] : g.edges()) {
        neighbours[i].push_back(j);
        neighbours[j].push_back(i);
    }
    DistanceMatrix d(n);
    std::queue<std::size_t> frontier;
    for (std::size_t source = 0; source < n; ++source) {
        d(source, source) = 0;
        frontier.push(source);
        while (!frontier.empty()) {
            auto u = frontier.front();
            frontier.pop();
            for (auto w : neighbours[u]) {
                if (d(source, w) == DistanceMatrix::unreachable) {
                    d(source, w) = d(source, u) + 1;
                    frontier.push(w);
                }
            }
        }
    }
    return d;
}

} // namespace lsta::graph

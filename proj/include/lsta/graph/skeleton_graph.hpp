#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <istream>
#include <limits>
#include <utility>
#include <vector>

namespace lsta::graph {

/// Undirected simple graph over joints 0..V-1. Self-loops are not stored.
class SkeletonGraph {
public:
    SkeletonGraph(std::size_t vertex_count, std::vector<std::pair<std::size_t, std::size_t>> edges);

    /// Whitespace-separated "i j" pairs, one per line. `vertex_count` of 0
    /// means max index + 1.
    static SkeletonGraph from_edge_list(std::istream& in, std::size_t vertex_count = 0);

    /// The 25-joint Kinect v2 skeleton.
    static SkeletonGraph ntu_rgbd();

    std::size_t vertex_count() const { return vertex_count_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    /// Binary symmetric A.
    Eigen::MatrixXd adjacency() const;
    /// A + I.
    Eigen::MatrixXd adjacency_with_self_loops() const;

private:
    std::size_t vertex_count_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

class DistanceMatrix {
public:
    static constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

    explicit DistanceMatrix(std::size_t n) : n_(n), hops_(n * n, unreachable) {}

    std::size_t size() const { return n_; }
    std::size_t operator()(std::size_t i, std::size_t j) const { return hops_[i * n_ + j]; }
    std::size_t& operator()(std::size_t i, std::size_t j) { return hops_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<std::size_t> hops_;
};

/// Unweighted shortest-path hop counts; disconnected pairs are `unreachable`.
DistanceMatrix bfs_distances(const SkeletonGraph& g);

} // namespace lsta::graph

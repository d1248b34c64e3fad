#pragma once

#include "lsta/graph/skeleton_graph.hpp"
#include "lsta/numerics/rng.hpp"
#include "lsta/numerics/tensor.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lsta {
class ParameterStore;
}

namespace lsta::graph {

enum class Scheme {
    AdjacencyPower,  ///< k-th power of the normalized A + I
    Disentangled,    ///< identity plus pairs at distance exactly k
    Decentralized,   ///< identity plus d(i,j)/k for 1 <= d(i,j) <= k
    /// Literal two-indicator form; evaluates to the binary d(i,j) <= k
    /// reachability matrix. Kept for comparison against Decentralized.
    DecentralizedIndicator,
};

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

/// out(i,j) = a(i,j) / sqrt(rowsum_i * rowsum_j). Throws on a zero row sum.
Eigen::MatrixXd normalize_sym(const Eigen::MatrixXd& a);

/// Scale-k matrix before normalization (AdjacencyPower is returned already
/// normalized, as a true matrix power).
Eigen::MatrixXd scale_matrix(const SkeletonGraph& g, const DistanceMatrix& d, int k, Scheme scheme);

/// Normalized scale matrices k = 0..K plus optional learnable residual
/// masks. The matrix consumed by aggregation is normalized + mask.
class MultiScaleAdjacency {
public:
    MultiScaleAdjacency(Scheme scheme, std::vector<Eigen::MatrixXd> matrices, std::vector<Tensor> masks);

    Scheme scheme() const { return scheme_; }
    std::size_t max_scale() const { return matrices_.size() - 1; }
    std::size_t scale_count() const { return matrices_.size(); }
    std::size_t vertex_count() const { return static_cast<std::size_t>(matrices_.front().rows()); }
    bool has_masks() const { return !masks_.empty(); }

    const Eigen::MatrixXd& matrix(std::size_t k) const { return matrices_.at(k); }
    const Tensor& mask(std::size_t k) const { return masks_.at(k); }

    /// V x V tensor for scale k; differentiable with respect to the mask.
    Tensor effective(std::size_t k) const;

    /// Copy sharing the normalized matrices but with freshly drawn masks.
    MultiScaleAdjacency with_fresh_masks(Rng& rng) const;

    void register_masks(ParameterStore& params, const std::string& prefix) const;

private:
    Scheme scheme_;
    std::vector<Eigen::MatrixXd> matrices_;
    std::vector<Tensor> constants_;
    std::vector<Tensor> masks_;
};

/// Initial masks are uniform in +-mask_init_range.
inline constexpr double mask_init_range = 1e-6;

MultiScaleAdjacency build_multiscale(const SkeletonGraph& g, std::size_t max_scale, Scheme scheme,
                                     bool with_masks, std::uint64_t seed);

Tensor matrix_to_tensor(const Eigen::MatrixXd& m, bool requires_grad = false);

} // namespace lsta::graph

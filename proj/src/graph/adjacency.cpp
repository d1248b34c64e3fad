#include "lsta/graph/adjacency.hpp"

#include "lsta/numerics/ops.hpp"
#include "lsta/numerics/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace lsta::graph {

Scheme parse_scheme(const std::string& name)
{
    if (name == "power") return Scheme::AdjacencyPower;
    if (name == "disentangled") return Scheme::Disentangled;
    if (name == "decentralized") return Scheme::Decentralized;
    if (name == "decentralized-indicator") return Scheme::DecentralizedIndicator;
    throw std::invalid_argument("unknown adjacency scheme '" + name + "'");
}

std::string scheme_name(Scheme scheme)
{
    switch (scheme) {
    case Scheme::AdjacencyPower: return "power";
    case Scheme::Disentangled: return "disentangled";
    case Scheme::Decentralized: return "decentralized";
    case Scheme::DecentralizedIndicator: return "decentralized-indicator";
    }
    return "?";
}

Eigen::MatrixXd normalize_sym(const Eigen::MatrixXd& a)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("normalize_sym: matrix must be square");
    Eigen::VectorXd rowsum = a.rowwise().sum();
    for (Eigen::Index i = 0; i < rowsum.size(); ++i) {
        if (!(rowsum(i) > 0.0)) {
            throw std::invalid_argument("normalize_sym: row " + std::to_string(i) + " has non-positive sum");
        }
    }
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) / std::sqrt(rowsum(i) * rowsum(j));
    }
    return out;
}

Eigen::MatrixXd scale_matrix(const SkeletonGraph& g, const DistanceMatrix& d, int k, Scheme scheme)
{
    if (k < 0) throw std::invalid_argument("scale_matrix: k must be non-negative");
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    if (d.size() != g.vertex_count()) throw std::invalid_argument("scale_matrix: distance matrix size mismatch");
    const auto scale = static_cast<std::size_t>(k);

    if (scheme == Scheme::AdjacencyPower) {
        Eigen::MatrixXd base = normalize_sym(g.adjacency_with_self_loops());
        Eigen::MatrixXd out = Eigen::MatrixXd::Identity(n, n);
        for (int p = 0; p < k; ++p) out = out * base;
        return out;
    }

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::size_t hops = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (i == j) {
                out(i, j) = 1.0;
            } else if (hops == DistanceMatrix::unreachable) {
                out(i, j) = 0.0;
            } else if (scheme == Scheme::Disentangled) {
                out(i, j) = hops == scale ? 1.0 : 0.0;
            } else if (scheme == Scheme::Decentralized) {
                out(i, j) = hops <= scale ? static_cast<double>(hops) / static_cast<double>(scale) : 0.0;
            } else {
                out(i, j) = hops <= scale ? 1.0 : 0.0;
            }
        }
    }
    return out;
}

Tensor matrix_to_tensor(const Eigen::MatrixXd& m, bool requires_grad)
{
    std::vector<double> values(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) values[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
    return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(values),
                  requires_grad);
}

MultiScaleAdjacency::MultiScaleAdjacency(Scheme scheme, std::vector<Eigen::MatrixXd> matrices,
                                         std::vector<Tensor> masks)
    : scheme_(scheme), matrices_(std::move(matrices)), masks_(std::move(masks))
{
    if (matrices_.empty()) throw std::invalid_argument("MultiScaleAdjacency: no scales");
    if (!masks_.empty() && masks_.size() != matrices_.size()) {
        throw std::invalid_argument("MultiScaleAdjacency: mask count must equal scale count");
    }
    for (const auto& m : matrices_) {
        if (m.rows() != matrices_.front().rows() || m.cols() != m.rows()) {
            throw std::invalid_argument("MultiScaleAdjacency: inconsistent matrix shapes");
        }
        constants_.push_back(matrix_to_tensor(m));
    }
}

Tensor MultiScaleAdjacency::effective(std::size_t k) const
{
    if (masks_.empty()) return constants_.at(k);
    return ops::add(constants_.at(k), masks_.at(k));
}

namespace {

std::vector<Tensor> draw_masks(std::size_t vertices, std::size_t count, Rng& rng)
{
    std::vector<Tensor> masks;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> values(vertices * vertices);
        for (auto& x : values) x = static_cast<float>(rng.uniform(-mask_init_range, mask_init_range));
        masks.emplace_back(Shape{vertices, vertices}, std::move(values), true);
    }
    return masks;
}

} // namespace

MultiScaleAdjacency MultiScaleAdjacency::with_fresh_masks(Rng& rng) const
{
    std::vector<Tensor> masks;
    if (!masks_.empty()) masks = draw_masks(vertex_count(), matrices_.size(), rng);
    return MultiScaleAdjacency(scheme_, matrices_, std::move(masks));
}

void MultiScaleAdjacency::register_masks(ParameterStore& params, const std::string& prefix) const
{
    for (std::size_t k = 0; k < masks_.size(); ++k) params.add(prefix + "." + std::to_string(k), masks_[k]);
}

MultiScaleAdjacency build_multiscale(const SkeletonGraph& g, std::size_t max_scale, Scheme scheme,
                                     bool with_masks, std::uint64_t seed)
{
    const auto d = bfs_distances(g);
    std::vector<Eigen::MatrixXd> matrices;
    for (std::size_t k = 0; k <= max_scale; ++k) {
        auto m = scale_matrix(g, d, static_cast<int>(k), scheme);
        matrices.push_back(scheme == Scheme::AdjacencyPower ? m : normalize_sym(m));
    }
    std::vector<Tensor> masks;
    if (with_masks) {
        Rng rng(seed);
        masks = draw_masks(g.vertex_count(), matrices.size(), rng);
    }
    return MultiScaleAdjacency(scheme, std::move(matrices), std::move(masks));
}

} // namespace lsta::graph

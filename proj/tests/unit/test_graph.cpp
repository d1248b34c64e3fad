#include "doctest.h"

#include "graph_oracles.hpp"

#include "lsta/graph/adjacency.hpp"
#include "lsta/graph/skeleton_graph.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

using namespace lsta;
using namespace lsta::graph;

namespace {

SkeletonGraph path4() { return SkeletonGraph(4, {{0, 1}, {1, 2}, {2, 3}}); }

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (auto row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

} // namespace

TEST_CASE("bfs_distances examples")
{
    auto single = bfs_distances(SkeletonGraph(1, {}));
    CHECK(single(0, 0) == 0);

    auto d = bfs_distances(path4());
    CHECK(d(0, 3) == 3);
    CHECK(d(1, 3) == 2);

    auto star = bfs_distances(SkeletonGraph(4, {{0, 1}, {0, 2}, {0, 3}}));
    CHECK(star(1, 2) == 2);
    CHECK(star(2, 3) == 2);

    auto split = bfs_distances(SkeletonGraph(3, {{0, 1}}));
    CHECK(split(0, 2) == DistanceMatrix::unreachable);
}

TEST_CASE("bfs_distances agree with Floyd-Warshall and satisfy metric axioms")
{
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto d = bfs_distances(g);
        auto fw = oracle::floyd_warshall(g);
        const auto n = g.vertex_count();
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(d(i, i) == 0);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(static_cast<long long>(d(i, j)) == fw[i][j]);
                CHECK(d(i, j) == d(j, i));
                for (std::size_t m = 0; m < n; ++m) CHECK(d(i, j) <= d(i, m) + d(m, j));
            }
        }
    }
}

TEST_CASE("normalize_sym examples")
{
    CHECK(normalize_sym(rows({{1}}))(0, 0) == 1.0);
    auto two = normalize_sym(rows({{1, 1}, {1, 1}}));
    CHECK((two.array() == 0.5).all());
    auto p = normalize_sym(path4().adjacency_with_self_loops());
    CHECK(p(0, 1) == doctest::Approx(0.408248290463863).epsilon(1e-12));
    CHECK_THROWS_AS(normalize_sym(rows({{1, 0}, {0, 0}})), std::invalid_argument);
}

TEST_CASE("scale_matrix examples")
{
    auto g = path4();
    auto d = bfs_distances(g);
    for (auto scheme : {Scheme::Decentralized, Scheme::Disentangled}) {
        CHECK(scale_matrix(g, d, 0, scheme).isApprox(Eigen::MatrixXd::Identity(4, 4), 0.0));
    }
    CHECK(scale_matrix(g, d, 1, Scheme::Decentralized) == g.adjacency_with_self_loops());
    CHECK(scale_matrix(g, d, 2, Scheme::Decentralized) ==
          rows({{1, 0.5, 1, 0}, {0.5, 1, 0.5, 1}, {1, 0.5, 1, 0.5}, {0, 1, 0.5, 1}}));
    CHECK(scale_matrix(g, d, 2, Scheme::Disentangled) ==
          rows({{1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}}));
    CHECK_THROWS_AS(scale_matrix(g, d, -1, Scheme::Decentralized), std::invalid_argument);

    auto base = normalize_sym(g.adjacency_with_self_loops());
    CHECK(scale_matrix(g, d, 3, Scheme::AdjacencyPower).isApprox(base * base * base, 1e-14));
    CHECK(scale_matrix(g, d, 0, Scheme::AdjacencyPower) == Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("the indicator form of the decentralized scale is reachability")
{
    auto g = path4();
    auto d = bfs_distances(g);
    auto fw = oracle::floyd_warshall(g);
    for (int k = 0; k <= 4; ++k) {
        Eigen::MatrixXd expected(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) expected(i, j) = fw[i][j] <= k ? 1.0 : 0.0;
        CHECK(scale_matrix(g, d, k, Scheme::DecentralizedIndicator) == expected);
    }
}

TEST_CASE("decentralized and disentangled scales equal their brute-force definitions")
{
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto d = bfs_distances(g);
        auto fw = oracle::floyd_warshall(g);
        for (int k = 0; k <= 6; ++k) {
            CHECK((scale_matrix(g, d, k, Scheme::Decentralized) - oracle::decentralized_by_indicators(fw, k))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-12);
            CHECK(scale_matrix(g, d, k, Scheme::Disentangled) == oracle::disentangled_by_definition(fw, k));
        }
    }
}

TEST_CASE("decentralized support and dependence on k")
{
    // For fixed (i,j) at distance d >= 1: zero while k < d, exactly 1 at
    // k = d, then d/k decreasing toward zero.
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto d = bfs_distances(g);
        const auto n = static_cast<Eigen::Index>(g.vertex_count());
        std::vector<Eigen::MatrixXd> scales;
        for (int k = 0; k <= 6; ++k) scales.push_back(scale_matrix(g, d, k, Scheme::Decentralized));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const std::size_t dij = d(i, j);
                for (std::size_t k = 0; k <= 6; ++k) {
                    const double e = scales[k](i, j);
                    CHECK((e > 0.0) == (dij <= k));
                    if (i == j || dij == k) CHECK(e == 1.0);
                    if (i != j && dij < k) CHECK(e < scales[k - 1](i, j));
                    if (dij > k) CHECK(e == 0.0);
                }
            }
        }
    }
}

TEST_CASE("disentangled scales have disjoint off-diagonal supports")
{
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto d = bfs_distances(g);
        const auto n = static_cast<Eigen::Index>(g.vertex_count());
        Eigen::MatrixXd coverage = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k <= 6; ++k) {
            Eigen::MatrixXd m = scale_matrix(g, d, k, Scheme::Disentangled);
            m.diagonal().setZero();
            coverage += m;
        }
        CHECK(coverage.maxCoeff() <= 1.0);
    }
}

TEST_CASE("normalize_sym keeps symmetry and bounds the spectral radius")
{
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto a = normalize_sym(g.adjacency_with_self_loops());
        CHECK(a.isApprox(a.transpose(), 0.0));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
        CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    }
}

TEST_CASE("build_multiscale examples")
{
    auto g = path4();
    auto single = build_multiscale(g, 0, Scheme::Decentralized, false, 0);
    CHECK(single.scale_count() == 1);
    CHECK(single.matrix(0) == Eigen::MatrixXd::Identity(4, 4));

    auto ms = build_multiscale(g, 2, Scheme::Decentralized, false, 0);
    CHECK(ms.matrix(2)(0, 1) == doctest::Approx(0.182574185835055).epsilon(1e-12));
    auto eff = ms.effective(2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(eff[i * 4 + j] == ms.matrix(2)(i, j));

    auto masked = build_multiscale(g, 3, Scheme::Decentralized, true, 7);
    REQUIRE(masked.has_masks());
    for (std::size_t k = 0; k <= 3; ++k) {
        CHECK(masked.mask(k).requires_grad());
        for (double v : masked.mask(k).values()) CHECK(std::abs(v) <= mask_init_range);
    }
    auto power = build_multiscale(g, 2, Scheme::AdjacencyPower, false, 0);
    auto base = normalize_sym(g.adjacency_with_self_loops());
    CHECK(power.matrix(2).isApprox(base * base, 1e-14));
}

TEST_CASE("edge list parsing")
{
    std::istringstream in("0 1\n1 2\n\n# comment\n2 3\n");
    auto g = SkeletonGraph::from_edge_list(in);
    CHECK(g.vertex_count() == 4);
    CHECK(g.edges().size() == 3);
    std::istringstream bad("0 x\n");
    CHECK_THROWS_AS(SkeletonGraph::from_edge_list(bad), std::invalid_argument);
    CHECK_THROWS_AS(SkeletonGraph(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(SkeletonGraph(3, {{1, 1}}), std::invalid_argument);
}

TEST_CASE("NTU skeleton graph is a tree over 25 joints")
{
    auto g = SkeletonGraph::ntu_rgbd();
    CHECK(g.vertex_count() == 25);
    CHECK(g.edges().size() == 24);
    auto d = bfs_distances(g);
    for (std::size_t j = 0; j < 25; ++j) CHECK(d(20, j) != DistanceMatrix::unreachable);
}

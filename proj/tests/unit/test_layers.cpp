#include "doctest.h"

#include "lsta/layers/block.hpp"
#include "lsta/layers/gradient_suite.hpp"
#include "lsta/numerics/ops.hpp"

#include <chrono>
#include <cmath>

using namespace lsta;
using namespace lsta::layers;

namespace {

graph::SkeletonGraph path_graph(std::size_t v)
{
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i + 1 < v; ++i) edges.emplace_back(i, i + 1);
    return graph::SkeletonGraph(v, edges);
}

void fill(Tensor t, double value)
{
    auto v = t.mutable_values();
    std::fill(v.begin(), v.end(), value);
}

void set_identity(Tensor t)
{
    fill(t, 0.0);
    auto v = t.mutable_values();
    for (std::size_t i = 0; i < t.dim(0); ++i) v[i * t.dim(1) + i] = 1.0;
}

void zero_masks(const graph::MultiScaleAdjacency& a)
{
    for (std::size_t k = 0; k < a.scale_count(); ++k) fill(a.mask(k), 0.0);
}

Tensor random_tensor(Rng& rng, Shape shape)
{
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = rng.normal();
    return Tensor(std::move(shape), std::move(values));
}

// Largest |t - t0| with a non-zero entry in frames of channel block [c0, c1).
std::size_t support_radius(const Tensor& y, std::size_t t0)
{
    const std::size_t c = y.dim(1), t = y.dim(2), v = y.dim(3);
    std::size_t radius = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t ti = 0; ti < t; ++ti) {
            for (std::size_t vi = 0; vi < v; ++vi) {
                if (y[(ci * t + ti) * v + vi] != 0.0) {
                    radius = std::max(radius, ti > t0 ? ti - t0 : t0 - ti);
                }
            }
        }
    }
    return radius;
}

} // namespace

TEST_CASE("msda: identity scale reduces to relu")
{
    Rng rng(1);
    auto adj = graph::build_multiscale(path_graph(4), 0, graph::Scheme::Decentralized, true, 3);
    zero_masks(adj);
    MsdaLayer layer(adj, 3, 3, {.batch_norm = false}, rng);
    set_identity(layer.weight(0));
    auto x = random_tensor(rng, {2, 3, 5, 4});
    auto y = layer.forward(x, true);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == std::max(0.0, x[i]));
}

TEST_CASE("msda: single-edge hand evaluation")
{
    Rng rng(2);
    auto adj = graph::build_multiscale(path_graph(2), 1, graph::Scheme::Decentralized, true, 3);
    zero_masks(adj);
    MsdaLayer layer(adj, 2, 2, {.batch_norm = false}, rng);
    set_identity(layer.weight(0));
    set_identity(layer.weight(1));
    // x[c][v]: joint 0 carries (1,0), joint 1 carries (0,1)
    Tensor x({1, 2, 1, 2}, {1, 0, 0, 1});
    auto y = layer.forward(x, true);
    const double expected[] = {1.5, 0.5, 0.5, 1.5};
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("msda: zero input gives zero output")
{
    Rng rng(3);
    auto adj = graph::build_multiscale(graph::SkeletonGraph::ntu_rgbd(), 3, graph::Scheme::Decentralized, true, 5);
    zero_masks(adj);
    MsdaLayer layer(adj, 3, 8, {}, rng);
    auto y = layer.forward(Tensor::zeros({2, 3, 4, 25}), true);
    for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("msda: rejects joint-count mismatch")
{
    Rng rng(4);
    MsdaLayer layer(graph::build_multiscale(path_graph(4), 1, graph::Scheme::Decentralized, true, 1), 2, 2, {}, rng);
    CHECK_THROWS_AS(layer.forward(Tensor::zeros({1, 2, 3, 5}), true), ShapeError);
}

TEST_CASE("msda: equivariant under vertex relabeling")
{
    Rng rng(5);
    const std::size_t v = 6;
    std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {1, 2}, {1, 3}, {3, 4}, {4, 5}, {2, 5}};
    const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2}; // new label of old vertex i
    std::vector<std::pair<std::size_t, std::size_t>> relabeled;
    for (auto [a, b] : edges) relabeled.emplace_back(perm[a], perm[b]);

    auto adj_a = graph::build_multiscale(graph::SkeletonGraph(v, edges), 3, graph::Scheme::Decentralized, false, 0);
    auto adj_b = graph::build_multiscale(graph::SkeletonGraph(v, relabeled), 3, graph::Scheme::Decentralized, false, 0);
    Rng ra(9), rb(9);
    MsdaLayer a(adj_a, 3, 4, {}, ra);
    MsdaLayer b(adj_b, 3, 4, {}, rb);

    const std::size_t n = 2, c = 3, t = 4;
    auto x = random_tensor(rng, {n, c, t, v});
    std::vector<double> xp(x.size());
    for (std::size_t i = 0; i < n * c * t; ++i) {
        for (std::size_t j = 0; j < v; ++j) xp[i * v + perm[j]] = x[i * v + j];
    }
    auto ya = a.forward(x, true);
    auto yb = b.forward(Tensor({n, c, t, v}, xp), true);
    for (std::size_t i = 0; i < n * 4 * t; ++i) {
        for (std::size_t j = 0; j < v; ++j) CHECK(std::abs(yb[i * v + perm[j]] - ya[i * v + j]) < 1e-12);
    }
}

TEST_CASE("msda: decentralized and disentangled agree at K=1")
{
    auto g = graph::SkeletonGraph::ntu_rgbd();
    Rng ra(11), rb(11), rx(12);
    MsdaLayer a(graph::build_multiscale(g, 1, graph::Scheme::Decentralized, false, 0), 3, 6, {}, ra);
    MsdaLayer b(graph::build_multiscale(g, 1, graph::Scheme::Disentangled, false, 0), 3, 6, {}, rb);
    auto x = random_tensor(rx, {2, 3, 5, 25});
    auto ya = a.forward(x, true);
    auto yb = b.forward(x, true);
    for (std::size_t i = 0; i < ya.size(); ++i) REQUIRE(ya[i] == yb[i]);
}

TEST_CASE("msda: initial masks barely perturb the output")
{
    auto g = graph::SkeletonGraph::ntu_rgbd();
    Rng ra(13), rb(13), rx(14);
    MsdaLayer a(graph::build_multiscale(g, 4, graph::Scheme::Decentralized, false, 0), 3, 6, {}, ra);
    MsdaLayer b(graph::build_multiscale(g, 4, graph::Scheme::Decentralized, true, 77), 3, 6, {}, rb);
    auto x = random_tensor(rx, {2, 3, 5, 25});
    auto ya = a.forward(x, true);
    auto yb = b.forward(x, true);
    double worst = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) worst = std::max(worst, std::abs(ya[i] - yb[i]));
    CHECK(worst > 0.0);
    CHECK(worst < 1e-4);
}

TEST_CASE("tpa: identity kernels telescope into cumulative sums")
{
    Rng rng(20);
    TpaOptions opts{.fragments = 6, .batch_norm = false, .activation = false};
    TpaLayer layer(6, 6, 1, opts, rng);
    for (std::size_t f = 0; f < 6; ++f) {
        auto e = layer.embed_weight(f);
        fill(e, 0.0);
        e.mutable_values()[f] = 1.0;
        auto c = layer.conv_weight(f);
        fill(c, 0.0);
        c.mutable_values()[1] = 1.0;
    }
    auto outputs = layer.fragment_outputs(Tensor::full({1, 6, 9, 2}, 1.0), true);
    REQUIRE(outputs.size() == 6);
    for (std::size_t f = 0; f < 6; ++f) {
        for (double v : outputs[f].values()) CHECK(v == static_cast<double>(f + 1));
    }
}

TEST_CASE("tpa: fragment width and output channels")
{
    Rng rng(21);
    TpaLayer layer(72, 72, 1, {}, rng);
    CHECK(layer.fragments() == 6);
    CHECK(layer.fragment_width() == 12);
    auto y = layer.forward(random_tensor(rng, {1, 72, 6, 2}), true);
    CHECK(y.shape() == Shape{1, 72, 6, 2});
    CHECK_THROWS_AS(TpaLayer(72, 70, 1, {}, rng), std::invalid_argument);
}

TEST_CASE("tpa: impulse support matches the analytic radius")
{
    Rng rng(22);
    TpaOptions opts{.fragments = 6, .batch_norm = false, .activation = false};
    TpaLayer layer(6, 12, 1, opts, rng);
    // positive weights rule out cancellation, so the support is exactly the radius
    for (std::size_t f = 0; f < 6; ++f) {
        for (auto& w : layer.embed_weight(f).mutable_values()) w = std::abs(w) + 0.1;
        for (auto& w : layer.conv_weight(f).mutable_values()) w = std::abs(w) + 0.1;
    }
    const std::size_t t = 64, t0 = 31;
    auto x = Tensor::zeros({1, 6, t, 1});
    for (std::size_t c = 0; c < 6; ++c) x.mutable_values()[c * t + t0] = 1.0;
    auto outputs = layer.fragment_outputs(x, true);
    std::size_t expected = 0;
    for (std::size_t f = 0; f < 6; ++f) {
        expected += f + 1;
        CHECK(layer.receptive_radius(f) == expected);
        CHECK(support_radius(outputs[f], t0) == expected);
    }
    CHECK(layer.receptive_radius(5) == 21);
}

TEST_CASE("tpa: output frames ignore inputs beyond the radius")
{
    Rng rng(23);
    TpaLayer layer(4, 8, 1, {.fragments = 2, .batch_norm = false}, rng);
    const std::size_t t = 24;
    auto base = random_tensor(rng, {1, 4, t, 3});
    std::vector<double> shifted(base.values().begin(), base.values().end());
    // perturb only frame 20; frames closer than radius+1 may change
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t v = 0; v < 3; ++v) shifted[(c * t + 20) * 3 + v] += 1.0;
    }
    auto ya = layer.fragment_outputs(base, false);
    auto yb = layer.fragment_outputs(Tensor({1, 4, t, 3}, shifted), false);
    for (std::size_t f = 0; f < 2; ++f) {
        const std::size_t r = layer.receptive_radius(f);
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t ti = 0; ti + r < 20; ++ti) {
                for (std::size_t v = 0; v < 3; ++v) {
                    const std::size_t i = (c * t + ti) * 3 + v;
                    if (c < ya[f].dim(1)) CHECK(ya[f][i] == yb[f][i]);
                }
            }
        }
    }
}

TEST_CASE("tpa: draft variant skips the first convolution")
{
    Rng rng(24);
    TpaOptions opts{.fragments = 3, .identity_first_fragment = true};
    TpaLayer layer(3, 6, 1, opts, rng);
    CHECK_FALSE(layer.conv_weight(0).defined());
    CHECK(layer.receptive_radius(0) == 0);
    CHECK(layer.receptive_radius(2) == 5);
    ParameterStore params;
    layer.register_parameters(params, "tpa");
    CHECK_FALSE(params.contains("tpa.conv.0"));
    CHECK(params.contains("tpa.conv.1"));
}

TEST_CASE("tpa: stride halves the frame count")
{
    Rng rng(25);
    TpaLayer layer(4, 6, 2, {.fragments = 3}, rng);
    CHECK(layer.forward(random_tensor(rng, {1, 4, 7, 2}), true).shape() == Shape{1, 6, 4, 2});
}

TEST_CASE("mam: zero kernels halve the input")
{
    Rng rng(30);
    MamLayer layer({}, rng);
    for (std::size_t b = 0; b < 3; ++b) fill(layer.kernel(b), 0.0);
    auto x = random_tensor(rng, {2, 7, 3, 4});
    auto y = layer.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == 0.5 * x[i]);
}

TEST_CASE("mam: constant descriptor closed form")
{
    Rng rng(31);
    MamLayer layer({.kernel = 3, .dilations = {1}}, rng);
    const double w[] = {0.3, -0.2, 0.7};
    std::copy(std::begin(w), std::end(w), layer.kernel(0).mutable_values().begin());
    const double c = 0.8;
    const std::size_t channels = 6;
    auto weights = layer.attention(Tensor::full({1, channels, 4, 3}, c));
    const double expected = 1.0 / (1.0 + std::exp(-c * (0.3 - 0.2 + 0.7)));
    for (std::size_t ch = 1; ch + 1 < channels; ++ch) CHECK(weights[ch] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mam: default layer has 15 parameters")
{
    Rng rng(32);
    MamLayer layer({}, rng);
    ParameterStore params;
    layer.register_parameters(params, "mam");
    CHECK(params.element_count() == 15);
    CHECK(layer.parameter_count() == 15);
}

TEST_CASE("mam: gate order commutes and weights lie in (0,1)")
{
    Rng init_a(33), init_b(33), rng(34);
    MamLayer a({.order = GateOrder::MaxThenSigmoid}, init_a);
    MamLayer b({.order = GateOrder::SigmoidThenMax}, init_b);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t channels = 1 + rng.index(32);
        auto x = random_tensor(rng, {1, channels, 1, 1});
        auto wa = a.attention(x);
        auto wb = b.attention(x);
        for (std::size_t i = 0; i < channels; ++i) {
            worst = std::max(worst, std::abs(wa[i] - wb[i]));
            REQUIRE(wa[i] > 0.0);
            REQUIRE(wa[i] < 1.0);
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("mam: non-negative input is attenuated")
{
    Rng rng(35);
    MamLayer layer({.pooling = Pooling::Average}, rng);
    auto x = random_tensor(rng, {2, 5, 4, 3});
    std::vector<double> pos(x.values().begin(), x.values().end());
    for (auto& v : pos) v = std::abs(v);
    Tensor xp({2, 5, 4, 3}, pos);
    auto y = layer.forward(xp);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] >= 0.0);
        CHECK(y[i] <= xp[i]);
    }
    CHECK(layer.last_attention().shape() == Shape{2, 5});
}

TEST_CASE("atpa: zero branch leaves the residual")
{
    Rng rng(40);
    AtpaLayer layer(6, 6, 1, {.fragments = 3}, MamOptions{}, rng);
    for (std::size_t f = 0; f < 3; ++f) fill(layer.tpa().embed_weight(f), 0.0);
    auto x = random_tensor(rng, {2, 6, 5, 3});
    auto y = layer.forward(x, true);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("atpa: stride and projection shapes")
{
    Rng rng(41);
    AtpaLayer strided(6, 6, 2, {.fragments = 3}, MamOptions{}, rng);
    CHECK_FALSE(strided.has_projection());
    CHECK(strided.forward(random_tensor(rng, {1, 6, 9, 2}), true).shape() == Shape{1, 6, 5, 2});
    AtpaLayer widened(4, 6, 2, {.fragments = 3}, MamOptions{}, rng);
    CHECK(widened.has_projection());
    CHECK(widened.forward(random_tensor(rng, {1, 4, 8, 2}), true).shape() == Shape{1, 6, 4, 2});
}

TEST_CASE("atpa: without attention equals tpa plus residual")
{
    Rng ra(42), rb(42), rx(43);
    AtpaLayer atpa(6, 6, 1, {.fragments = 2}, std::nullopt, ra);
    TpaLayer tpa(6, 6, 1, {.fragments = 2}, rb);
    CHECK(atpa.attention() == nullptr);
    auto x = random_tensor(rx, {2, 6, 5, 3});
    auto ya = atpa.forward(x, true);
    auto yt = tpa.forward(x, true);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(ya[i] == yt[i] + x[i]);
}

TEST_CASE("block: shape propagation")
{
    Rng rng(50);
    auto adj = graph::build_multiscale(graph::SkeletonGraph::ntu_rgbd(), 2, graph::Scheme::Decentralized, true, 1);
    LstaBlock first(adj.with_fresh_masks(rng), 3, 72, 1, {}, rng);
    auto y1 = first.forward(random_tensor(rng, {2, 3, 32, 25}), true);
    CHECK(y1.shape() == Shape{2, 72, 32, 25});
    LstaBlock second(adj.with_fresh_masks(rng), 72, 144, 2, {}, rng);
    CHECK(second.forward(y1, true).shape() == Shape{2, 144, 16, 25});
}

TEST_CASE("block: one msda and three atpa, zero in zero out")
{
    Rng rng(51);
    auto adj = graph::build_multiscale(path_graph(5), 2, graph::Scheme::Decentralized, true, 2);
    zero_masks(adj);
    LstaBlock block(adj, 3, 6, 2, {}, rng);
    CHECK(LstaBlock::atpa_count == 3);
    CHECK(block.atpa(0).tpa().stride() == 2);
    CHECK(block.atpa(1).tpa().stride() == 1);
    CHECK_THROWS(block.atpa(3));
    auto y = block.forward(Tensor::zeros({2, 3, 6, 5}), true);
    CHECK(y.shape() == Shape{2, 6, 3, 5});
    for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("gradient suite: every layer within tolerance")
{
    const auto start = std::chrono::steady_clock::now();
    GradientSuiteOptions opts;
    auto cases = run_layer_gradient_suite(opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(cases.size() == 5 * opts.configs);
    for (const auto& c : cases) {
        INFO(c.layer << " " << c.config << " worst " << c.report.worst);
        CHECK(c.report.max_relative_error < 1e-4);
    }
    MESSAGE("layer gradient suite: " << seconds << " s");
}

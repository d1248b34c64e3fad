#include "lsta/layers/gradient_suite.hpp"

#include "lsta/layers/block.hpp"
#include "lsta/numerics/ops.hpp"

#include <algorithm>
#include <sstream>

namespace lsta::layers {

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

graph::SkeletonGraph random_graph(Rng& rng, std::size_t v)
{
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 1; i < v; ++i) edges.emplace_back(rng.index(i), i);
    const std::size_t extra = rng.index(v);
    for (std::size_t e = 0; e < extra; ++e) {
        auto a = rng.index(v), b = rng.index(v);
        if (a == b) continue;
        if (std::find(edges.begin(), edges.end(), std::pair{a, b}) != edges.end() ||
            std::find(edges.begin(), edges.end(), std::pair{b, a}) != edges.end()) {
            continue;
        }
        edges.emplace_back(a, b);
    }
    return graph::SkeletonGraph(v, std::move(edges));
}

Tensor random_input(Rng& rng, Shape shape)
{
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = rng.normal();
    return Tensor(std::move(shape), std::move(values), true);
}

std::vector<double> random_weights(Rng& rng, std::size_t n)
{
    std::vector<double> w(n);
    for (auto& v : w) v = rng.normal();
    return w;
}

MamOptions random_mam(Rng& rng)
{
    MamOptions m;
    m.kernel = 2 * pick(rng, 0, 2) + 1;
    m.dilations.clear();
    const std::size_t branches = pick(rng, 1, 3);
    for (std::size_t b = 0; b < branches; ++b) m.dilations.push_back(b + 1);
    m.pooling = rng.index(2) ? Pooling::Max : Pooling::Average;
    m.order = rng.index(2) ? GateOrder::MaxThenSigmoid : GateOrder::SigmoidThenMax;
    return m;
}

graph::Scheme random_scheme(Rng& rng)
{
    static constexpr graph::Scheme schemes[] = {graph::Scheme::AdjacencyPower, graph::Scheme::Disentangled,
                                                graph::Scheme::Decentralized};
    return schemes[rng.index(3)];
}

struct Config {
    std::size_t n, c_in, c_out, t, v, stride, k, fragments;
    graph::Scheme scheme;
    MamOptions mam;

    std::string describe() const
    {
        std::ostringstream os;
        os << "N=" << n << " Cin=" << c_in << " Cout=" << c_out << " T=" << t << " V=" << v << " stride=" << stride
           << " K=" << k << " S=" << fragments << " scheme=" << graph::scheme_name(scheme) << " eta=" << mam.kernel
           << " dilations=" << mam.dilations.size()
           << " pool=" << (mam.pooling == Pooling::Max ? "max" : "avg");
        return os.str();
    }
};

Config random_config(Rng& rng)
{
    Config c;
    c.n = pick(rng, 1, 2);
    c.v = pick(rng, 2, 6);
    c.t = pick(rng, 4, 12);
    c.c_in = pick(rng, 1, 12);
    c.fragments = pick(rng, 1, 3);
    c.c_out = c.fragments * pick(rng, 1, 12 / c.fragments);
    c.stride = pick(rng, 1, 2);
    c.k = pick(rng, 0, 3);
    c.scheme = random_scheme(rng);
    c.mam = random_mam(rng);
    return c;
}

GradientCase check(const std::string& layer, const Config& c, Rng& rng, ParameterStore& params,
                   const Tensor& input, const std::function<Tensor(const Tensor&)>& forward,
                   const GradcheckOptions& options)
{
    params.add("input", input);
    Shape out_shape;
    {
        NoGradGuard guard;
        out_shape = forward(input).shape();
    }
    const auto weights = random_weights(rng, shape_size(out_shape));
    auto objective = [&] { return ops::weighted_sum(forward(input), weights); };
    GradcheckOptions opts = options;
    opts.seed = rng.next();
    return {layer, c.describe(), finite_diff_gradcheck(objective, params, opts)};
}

} // namespace

std::vector<GradientCase> run_layer_gradient_suite(const GradientSuiteOptions& options,
                                                   const std::vector<std::string>& layers)
{
    static const std::vector<std::string> all{"msda", "tpa", "mam", "atpa", "block"};
    for (const auto& name : layers) {
        if (std::find(all.begin(), all.end(), name) == all.end()) {
            throw std::invalid_argument("unknown layer for gradient suite: " + name);
        }
    }
    const auto& selected = layers.empty() ? all : layers;

    std::vector<GradientCase> cases;
    Rng rng(options.seed);
    for (std::size_t i = 0; i < options.configs; ++i) {
        const Config c = random_config(rng);
        const auto g = random_graph(rng, c.v);
        for (const auto& layer : selected) {
            ParameterStore params;
            GradientCase result;
            if (layer == "msda") {
                MsdaOptions mo;
                if (rng.index(2)) mo.attention = c.mam;
                MsdaLayer m(graph::build_multiscale(g, c.k, c.scheme, true, rng.next()), c.c_in, c.c_out, mo, rng);
                m.register_parameters(params, "msda");
                auto x = random_input(rng, {c.n, c.c_in, c.t, c.v});
                result = check(layer, c, rng, params, x, [&](const Tensor& in) { return m.forward(in, true); },
                               options.check);
            } else if (layer == "tpa") {
                TpaOptions to;
                to.fragments = c.fragments;
                to.identity_first_fragment = rng.index(4) == 0;
                TpaLayer m(c.c_in, c.c_out, c.stride, to, rng);
                m.register_parameters(params, "tpa");
                auto x = random_input(rng, {c.n, c.c_in, c.t, c.v});
                result = check(layer, c, rng, params, x, [&](const Tensor& in) { return m.forward(in, true); },
                               options.check);
            } else if (layer == "mam") {
                MamLayer m(c.mam, rng);
                m.register_parameters(params, "mam");
                auto x = random_input(rng, {c.n, c.c_in, c.t, c.v});
                result = check(layer, c, rng, params, x, [&](const Tensor& in) { return m.forward(in); },
                               options.check);
            } else if (layer == "atpa") {
                TpaOptions to;
                to.fragments = c.fragments;
                AtpaLayer m(c.c_in, c.c_out, c.stride, to, c.mam, rng);
                m.register_parameters(params, "atpa");
                auto x = random_input(rng, {c.n, c.c_in, c.t, c.v});
                result = check(layer, c, rng, params, x, [&](const Tensor& in) { return m.forward(in, true); },
                               options.check);
            } else {
                BlockOptions bo;
                bo.tpa.fragments = c.fragments;
                bo.temporal_attention = c.mam;
                LstaBlock m(graph::build_multiscale(g, c.k, c.scheme, true, rng.next()), c.c_in, c.c_out, c.stride,
                            bo, rng);
                m.register_parameters(params, "block");
                auto x = random_input(rng, {c.n, c.c_in, c.t, c.v});
                result = check(layer, c, rng, params, x, [&](const Tensor& in) { return m.forward(in, true); },
                               options.check);
            }
            if (options.on_case) options.on_case(result);
            cases.push_back(std::move(result));
        }
    }
    return cases;
}

} // namespace lsta::layers

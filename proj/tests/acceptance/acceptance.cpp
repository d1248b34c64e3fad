#include "graph_oracles.hpp"

#include "lsta/data/synthetic.hpp"
#include "lsta/engine/trainer.hpp"
#include "lsta/graph/adjacency.hpp"
#include "lsta/layers/gradient_suite.hpp"
#include "lsta/layers/probe.hpp"
#include "lsta/model/net_gradcheck.hpp"
#include "lsta/model/param_count.hpp"
#include "lsta/numerics/ops.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace lsta;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome adjacency_oracle()
{
    const auto start = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0.0;
    std::size_t matrices = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto d = graph::bfs_distances(g);
        auto fw = oracle::floyd_warshall(g);
        for (int k = 0; k <= 6; ++k) {
            auto dec = graph::scale_matrix(g, d, k, graph::Scheme::Decentralized);
            auto dis = graph::scale_matrix(g, d, k, graph::Scheme::Disentangled);
            worst = std::max(worst, (dec - oracle::decentralized_by_indicators(fw, k)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (dis - oracle::disentangled_by_definition(fw, k)).cwiseAbs().maxCoeff());
            matrices += 2;
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-12 && elapsed < 10.0,
            fmt("%zu matrices, max |diff| %.3g, %.2f s", matrices, worst, elapsed)};
}

Outcome normalization_spectra()
{
    Rng rng(2024);
    double radius = 0.0;
    double asymmetry = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto g = oracle::random_connected_graph(rng, 12);
        auto a = graph::normalize_sym(g.adjacency_with_self_loops());
        asymmetry = std::max(asymmetry, (a - a.transpose()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
        radius = std::max(radius, eig.eigenvalues().cwiseAbs().maxCoeff());
    }
    return {radius <= 1.0 + 1e-9 && asymmetry == 0.0,
            fmt("200 graphs, max spectral radius %.17g", radius)};
}

Outcome gradient_suite()
{
    const auto start = std::chrono::steady_clock::now();
    layers::GradientSuiteOptions options;
    options.configs = 20;
    std::map<std::string, double> worst;
    std::map<std::string, std::size_t> cases;
    for (const auto& c : layers::run_layer_gradient_suite(options)) {
        worst[c.layer] = std::max(worst[c.layer], c.report.max_relative_error);
        ++cases[c.layer];
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto c = model::reduced_net_gradcheck(seed, 200);
        worst["net"] = std::max(worst["net"], c.report.max_relative_error);
        ++cases["net"];
    }
    const double elapsed = seconds_since(start);
    bool pass = elapsed < 120.0;
    std::string detail;
    for (const auto* layer : {"msda", "tpa", "mam", "atpa", "block", "net"}) {
        pass = pass && cases[layer] >= 20 && worst[layer] < 1e-4;
        detail += fmt("%s %.2g (%zu) ", layer, worst[layer], cases[layer]);
    }
    return {pass, detail + fmt("max rel err (configs), %.1f s", elapsed)};
}

Outcome tpa_telescoping()
{
    double telescoping = 0.0;
    for (std::size_t s = 1; s <= 8; ++s) telescoping = std::max(telescoping, layers::tpa_telescoping_error(s));
    bool radii = true;
    std::string measured;
    const std::vector<std::vector<std::size_t>> dilation_sets{{}, {1, 1, 1, 1, 1, 1}, {1, 2, 4, 8}, {2, 3, 5}};
    for (const auto& dilations : dilation_sets) {
        const std::size_t s = dilations.empty() ? 6 : dilations.size();
        std::size_t widest = 0;
        for (std::size_t f = 0; f < s; ++f) widest += dilations.empty() ? f + 1 : dilations[f];
        auto probe = layers::tpa_impulse_probe({.fragments = s, .dilations = dilations}, 2 * widest + 11, 5);
        radii = radii && probe.matches();
        measured += "[";
        for (const auto& f : probe.fragments) measured += std::to_string(f.measured_radius) + " ";
        measured.back() = ']';
    }
    return {telescoping == 0.0 && radii,
            fmt("cumulative-sum error %.3g; radii %s", telescoping, measured.c_str())};
}

Outcome mam_commutation()
{
    Rng init_a(33), init_b(33), rng(34);
    layers::MamLayer a({.order = layers::GateOrder::MaxThenSigmoid}, init_a);
    layers::MamLayer b({.order = layers::GateOrder::SigmoidThenMax}, init_b);
    double worst = 0.0, lo = 1.0, hi = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t channels = 1 + rng.index(64);
        std::vector<double> values(channels);
        for (auto& v : values) v = 3.0 * rng.normal();
        Tensor x({1, channels, 1, 1}, values);
        auto wa = a.attention(x);
        auto wb = b.attention(x);
        for (std::size_t i = 0; i < channels; ++i) {
            worst = std::max(worst, std::abs(wa[i] - wb[i]));
            lo = std::min({lo, wa[i], wb[i]});
            hi = std::max({hi, wa[i], wb[i]});
        }
    }
    return {worst <= 1e-12 && lo > 0.0 && hi < 1.0,
            fmt("1000 descriptors, max |diff| %.3g, omega in [%.6g, %.6g]", worst, lo, hi)};
}

Outcome parameter_budget()
{
    model::LstaNetConfig config;
    model::LstaNet net(config, 1);
    const auto runtime = model::param_count(net).total;
    const auto formula = model::analytic::net(config, net.vertex_count()).total;
    return {runtime == formula && runtime >= 900000 && runtime <= 1100000,
            fmt("runtime %zu, analytic %zu, band [900000, 1100000]", runtime, formula)};
}

Outcome overfit()
{
    auto data = data::synthetic_dataset({});
    engine::TrainOptions options;
    options.config.epochs = 200;
    options.config.batch_size = 8;
    options.config.decay_epochs = {};
    options.config.seed = 1;

    const auto start = std::chrono::steady_clock::now();
    model::LstaNet net(model::reduced_config(4, 32), options.config.seed);
    std::optional<std::size_t> first_perfect;
    double time_to_perfect = 0.0;
    engine::NetSnapshot at_40;
    options.on_epoch = [&](const engine::EpochMetrics& m) {
        if (!first_perfect && m.top1 == 1.0) {
            first_perfect = m.epoch + 1;
            time_to_perfect = seconds_since(start);
        }
        if (m.epoch + 1 == 40) at_40 = engine::NetSnapshot::capture(net);
    };
    auto first = engine::train(net, data, options);
    const double full_run = seconds_since(start);

    auto repeat_options = options;
    repeat_options.config.epochs = 40;
    repeat_options.on_epoch = nullptr;
    model::LstaNet twin(model::reduced_config(4, 32), options.config.seed);
    auto second = engine::train(twin, data, repeat_options);
    bool deterministic = at_40.tensors == engine::NetSnapshot::capture(twin).tensors;
    for (std::size_t e = 0; e < second.history.size(); ++e) {
        deterministic = deterministic && second.history[e].loss == first.history[e].loss;
    }

    const auto& h = first.history;
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        head += h[h.size() - 20 + i].loss;
        tail += h[h.size() - 10 + i].loss;
    }
    const bool trailing = tail <= head && h.back().loss <= h[h.size() - 20].loss;

    const bool pass = first_perfect && *first_perfect <= 200 && time_to_perfect < 300.0 && deterministic;
    return {pass, fmt("100%% train accuracy after %zu epochs (%.1f s), 200 epochs in %.1f s, final top1 %.3g, "
                      "deterministic %s, trailing-20 loss %s",
                      first_perfect.value_or(0), time_to_perfect, full_run, h.back().top1,
                      deterministic ? "yes" : "no", trailing ? "non-increasing" : "increasing")};
}

Outcome bone_identity()
{
    const auto tree = data::BoneTree::ntu_rgbd();
    Rng rng(11);
    std::size_t paths = 0, mismatches = 0;
    for (int pose = 0; pose < 100; ++pose) {
        std::vector<double> values(3 * 25);
        // dyadic coordinates: every difference and partial sum is exact
        for (auto& v : values) v = static_cast<double>(static_cast<long>(rng.index(1 << 20)) - (1 << 19)) / 4096.0;
        Tensor joints({3, 1, 25, 1}, values);
        auto bones = data::to_bone(joints, tree);
        for (auto leaf : tree.leaves()) {
            ++paths;
            for (std::size_t c = 0; c < 3; ++c) {
                double sum = 0.0;
                for (auto j : tree.path_from_center(leaf)) sum += bones[c * 25 + j];
                if (sum != joints[c * 25 + leaf] - joints[c * 25 + tree.center()]) ++mismatches;
            }
        }
    }
    return {mismatches == 0 && paths > 0, fmt("%zu center-to-leaf paths, %zu inexact components", paths, mismatches)};
}

Outcome lr_schedule()
{
    engine::TrainConfig config;
    const double got[] = {engine::lr_at(config, 0), engine::lr_at(config, 40), engine::lr_at(config, 60),
                          engine::lr_at(config, 80)};
    const bool pass = got[0] == 0.05 && got[1] == 0.005 && got[2] == 5e-4 && got[3] == 5e-5;
    return {pass, fmt("epochs 0/40/60/80 -> %.17g / %.17g / %.17g / %.17g", got[0], got[1], got[2], got[3])};
}

Outcome ablation_plumbing()
{
    std::vector<std::string> configs;
    for (const auto* scheme : {"power", "disentangled", "decentralized"}) {
        for (int k : {1, 4, 8, 12}) configs.push_back(fmt("spatial_scheme = %s\nmax_scale = %d\n", scheme, k));
    }
    for (int s : {4, 6, 8}) configs.push_back(fmt("fragments = %d\n", s));
    const std::vector<std::pair<int, const char*>> mam_grid{{3, "1,2,3"}, {5, "1"},     {5, "1,2"}, {5, "1,2,3"},
                                                             {5, "1,2,3,4"}, {7, "1,2,3"}, {9, "1,2,3"}};
    for (const auto* pooling : {"average", "max"}) {
        for (const auto& [eta, dilations] : mam_grid) {
            configs.push_back(fmt("mam_pooling = %s\nmam_kernel = %d\nmam_dilations = %s\n", pooling, eta, dilations));
        }
    }
    for (const auto* spatial : {"false", "true"}) {
        for (const auto* temporal : {"false", "true"}) {
            configs.push_back(fmt("spatial_attention = %s\ntemporal_attention = %s\n", spatial, temporal));
        }
    }

    Rng rng(9);
    std::vector<double> values(2 * 3 * 16 * 25 * 2);
    for (auto& v : values) v = rng.normal();
    const Tensor x({2, 3, 16, 25, 2}, values);
    const std::vector<int> labels{0, 3};
    std::size_t completed = 0;
    std::string failures;
    for (const auto& text : configs) {
        try {
            std::istringstream in("block_channels = 24,48,96\nnum_classes = 4\nframes = 16\n" + text);
            auto file = model::ConfigFile::parse(in);
            model::LstaNetConfig config;
            config.apply(file);
            if (!file.unused().empty()) throw std::runtime_error("unused keys");
            model::LstaNet net(config, 3);
            auto loss = ops::softmax_cross_entropy(net.forward(x, true), labels);
            loss.backward();
            OptimizerState sgd;
            sgd.learning_rate = 0.01;
            sgd_nesterov_step(net.parameters(), sgd);
            ++completed;
        } catch (const std::exception& e) {
            std::string line = text;
            for (auto& ch : line) ch = ch == '\n' ? ';' : ch;
            failures += " {" + line + ": " + e.what() + "}";
        }
    }
    return {completed == configs.size(),
            fmt("%zu/%zu configs built and stepped", completed, configs.size()) + failures};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"adjacency oracle", adjacency_oracle},
        {"normalization spectra", normalization_spectra},
        {"gradient suite", gradient_suite},
        {"TPA telescoping and receptive field", tpa_telescoping},
        {"MAM commutation", mam_commutation},
        {"parameter budget", parameter_budget},
        {"overfit sanity", overfit},
        {"bone-stream identity", bone_identity},
        {"LR schedule", lr_schedule},
        {"ablation plumbing", ablation_plumbing},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failed;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << name << ": " << outcome.detail << std::endl;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}

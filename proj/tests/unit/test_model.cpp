#include "doctest.h"

#include "lsta/model/checkpoint.hpp"
#include "lsta/model/net_gradcheck.hpp"
#include "lsta/model/param_count.hpp"
#include "lsta/numerics/ops.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lsta;
using namespace lsta::model;

namespace {

Tensor random_input(Rng& rng, Shape shape)
{
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = rng.normal();
    return Tensor(std::move(shape), std::move(values));
}

LstaNetConfig small_config()
{
    auto c = reduced_config(4, 8);
    c.graph = "stick-6";
    c.max_scale = 2;
    return c;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("lsta_test_" + name)).string();
}

void fill(Tensor t, double value)
{
    auto v = t.mutable_values();
    std::fill(v.begin(), v.end(), value);
}

} // namespace

TEST_CASE("config: key=value round trip")
{
    LstaNetConfig c;
    c.block_channels = {12, 24, 48};
    c.mam_pooling = layers::Pooling::Average;
    c.spatial_scheme = graph::Scheme::Disentangled;
    c.tpa_dilations = {1, 1, 2, 2, 3, 3};
    std::ostringstream text;
    for (const auto& [k, v] : c.to_key_values()) text << k << " = " << v << "\n";
    std::istringstream in("# comment\n\n" + text.str());
    auto file = ConfigFile::parse(in);
    LstaNetConfig back;
    back.apply(file);
    CHECK(file.unused().empty());
    CHECK(canonical_text(back) == canonical_text(c));
}

TEST_CASE("config: errors")
{
    std::istringstream bad_line("fragments 6\n");
    CHECK_THROWS_AS(ConfigFile::parse(bad_line), ConfigError);
    std::istringstream dup("a=1\na=2\n");
    CHECK_THROWS_AS(ConfigFile::parse(dup), ConfigError);
    std::istringstream text("fragments = x\n");
    auto file = ConfigFile::parse(text);
    LstaNetConfig c;
    CHECK_THROWS_AS(c.apply(file), ConfigError);

    LstaNetConfig odd;
    odd.block_channels = {72, 144, 290};
    CHECK_THROWS_AS(odd.validate(), ConfigError);
    LstaNetConfig two;
    two.block_channels = {72, 144};
    two.block_strides = {1, 2};
    CHECK_THROWS_AS(two.validate(), ConfigError);

    std::istringstream extra("fragments = 6\nlearning_rate = 0.1\n");
    auto f2 = ConfigFile::parse(extra);
    c.apply(f2);
    CHECK(f2.unused() == std::vector<std::string>{"learning_rate"});
}

TEST_CASE("net: full config shape")
{
    LstaNet net(LstaNetConfig{}, 1);
    Rng rng(2);
    auto x = random_input(rng, {2, 3, 300, 25, 2});
    Tensor logits;
    {
        NoGradGuard guard;
        logits = net.forward(x, false);
    }
    CHECK(logits.shape() == Shape{2, 60});
    CHECK_THROWS_AS(net.forward(random_input(rng, {2, 3, 299, 25, 2}), false), ShapeError);
}

TEST_CASE("net: zero input and zero classifier give zero logits")
{
    LstaNet net(small_config(), 3);
    for (auto& [name, t] : net.parameters()) {
        if (name.find(".mask.") != std::string::npos || name == "classifier.weight") fill(t, 0.0);
    }
    auto logits = net.forward(Tensor::zeros({2, 3, 8, 6, 2}), true);
    for (double v : logits.values()) CHECK(v == 0.0);
}

TEST_CASE("net: swapping persons leaves logits unchanged")
{
    LstaNet net(small_config(), 4);
    Rng rng(5);
    const Shape shape{2, 3, 8, 6, 2};
    auto x = random_input(rng, shape);
    std::vector<double> swapped(x.size());
    for (std::size_t i = 0; i < x.size(); i += 2) {
        swapped[i] = x[i + 1];
        swapped[i + 1] = x[i];
    }
    // eval mode, so the input statistics are the (swap-symmetric) running buffers
    auto a = net.forward(x, false);
    auto b = net.forward(Tensor(shape, swapped), false);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("net: deterministic in eval mode")
{
    LstaNet a(small_config(), 6), b(small_config(), 6);
    Rng rng(7);
    auto x = random_input(rng, {2, 3, 8, 6, 2});
    auto ya = a.forward(x, false);
    auto yb = b.forward(x, false);
    auto ya2 = a.forward(x, false);
    for (std::size_t i = 0; i < ya.size(); ++i) {
        CHECK(ya[i] == yb[i]);
        CHECK(ya[i] == ya2[i]);
    }
}

TEST_CASE("param_count: small examples")
{
    CHECK(analytic::msda(3, 72, 0, 25, false, false, 0) == 216);
    CHECK(analytic::msda(3, 72, 8, 25, false, false, 0) == 1944);
    Rng rng(8);
    layers::MsdaLayer layer(graph::build_multiscale(graph::SkeletonGraph::ntu_rgbd(), 0,
                                                    graph::Scheme::Decentralized, false, 0),
                            3, 72, {.batch_norm = false}, rng);
    ParameterStore params;
    layer.register_parameters(params, "m");
    CHECK(params.element_count() == 216);
}

TEST_CASE("param_count: full config within the 1.0M band and equal to the formula")
{
    LstaNetConfig config;
    LstaNet net(config, 9);
    auto runtime = param_count(net);
    auto formula = analytic::net(config, 25);
    CHECK(runtime.total == formula.total);
    CHECK(runtime.total == net.parameters().element_count());
    REQUIRE(runtime.rows.size() == formula.rows.size());
    for (std::size_t i = 0; i < runtime.rows.size(); ++i) {
        CHECK(runtime.rows[i].module == formula.rows[i].module);
        CHECK(runtime.rows[i].count == formula.rows[i].count);
    }
    CHECK(runtime.total >= 900000);
    CHECK(runtime.total <= 1100000);
    MESSAGE("full joint-only config: " << runtime.total << " parameters");
}

TEST_CASE("param_count: formula matches across configurations")
{
    Rng rng(10);
    for (int trial = 0; trial < 12; ++trial) {
        LstaNetConfig c;
        c.graph = trial % 2 ? "stick-6" : "ntu-rgbd";
        c.fragments = 1 + rng.index(4);
        for (auto& ch : c.block_channels) ch = c.fragments * (1 + rng.index(4));
        c.max_scale = rng.index(5);
        c.mam_kernel = 2 * rng.index(3) + 1;
        c.mam_dilations.resize(1 + rng.index(3));
        c.with_masks = rng.index(2);
        c.temporal_attention = rng.index(2);
        c.spatial_attention = rng.index(2);
        c.identity_first_fragment = rng.index(2);
        c.num_classes = 2 + rng.index(10);
        c.persons = 1 + rng.index(2);
        LstaNet net(c, trial);
        CHECK(param_count(net).total == analytic::net(c, net.vertex_count()).total);
    }
}

TEST_CASE("checkpoint: bit-exact round trip")
{
    const auto config = small_config();
    LstaNet net(config, 11);
    Rng rng(12);
    auto x = random_input(rng, {3, 3, 8, 6, 2});
    net.forward(x, true); // moves the running statistics off their initial values
    const auto path = temp_path("roundtrip.ckpt");
    save_checkpoint(net, path, {.epoch = 7, .seed = 99});
    TrainingMetadata meta;
    auto loaded = load_checkpoint(path, config, &meta);
    CHECK(meta.epoch == 7);
    CHECK(meta.seed == 99);
    auto a = net.forward(x, false);
    auto b = loaded.forward(x, false);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    using Stores = std::pair<ParameterStore*, ParameterStore*>;
    for (auto pair : {Stores{&net.parameters(), &loaded.parameters()}, Stores{&net.buffers(), &loaded.buffers()}}) {
        auto it = pair.second->begin();
        for (auto& [name, t] : *pair.first) {
            CHECK(name == it->first);
            CHECK(std::equal(t.values().begin(), t.values().end(), it->second.values().begin()));
            ++it;
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint: corrupt magic, truncation and digest mismatch")
{
    const auto config = small_config();
    LstaNet net(config, 13);
    const auto path = temp_path("bad.ckpt");
    save_checkpoint(net, path);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
    }
    try {
        TensorArchive::read(path);
        FAIL("expected a format error");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointError::Kind::Format);
    }

    save_checkpoint(net, path);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 20);
    try {
        TensorArchive::read(path);
        FAIL("expected a truncation error");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointError::Kind::Truncated);
    }

    save_checkpoint(net, path);
    auto other = config;
    other.num_classes = 5;
    try {
        load_checkpoint(path, other);
        FAIL("expected a digest error");
    } catch (const CheckpointError& e) {
        CHECK(e.kind() == CheckpointError::Kind::Digest);
    }
    std::filesystem::remove(path);
}

TEST_CASE("digest: known SHA-256 vector")
{
    CHECK(digest_hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("gradient: reduced net")
{
    auto result = reduced_net_gradcheck(21);
    INFO(result.config << " worst " << result.report.worst);
    CHECK(result.report.checks == 400);
    CHECK(result.report.max_relative_error < 1e-4);
}

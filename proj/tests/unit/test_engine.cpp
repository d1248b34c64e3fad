#include "doctest.h"

#include "lsta/data/synthetic.hpp"
#include "lsta/engine/trainer.hpp"

#include <cmath>
#include <sstream>

using namespace lsta;
using namespace lsta::engine;

namespace {

std::vector<double> flat_parameters(model::LstaNet& net)
{
    std::vector<double> out;
    for (const auto& [name, t] : net.parameters()) out.insert(out.end(), t.values().begin(), t.values().end());
    return out;
}

TrainOptions quick(std::size_t epochs)
{
    TrainOptions o;
    o.config.epochs = epochs;
    o.config.batch_size = 8;
    o.config.decay_epochs = {};
    return o;
}

} // namespace

TEST_CASE("lr_at examples")
{
    TrainConfig c;
    CHECK(lr_at(c, 0) == 0.05);
    CHECK(lr_at(c, 39) == 0.05);
    CHECK(lr_at(c, 40) == 0.005);
    CHECK(lr_at(c, 59) == 0.005);
    CHECK(lr_at(c, 60) == 5e-4);
    CHECK(lr_at(c, 80) == 5e-5);
    CHECK(lr_at(c, 99) == 5e-5);
    for (std::size_t e = 1; e < 120; ++e) CHECK(lr_at(c, e) <= lr_at(c, e - 1));

    TrainConfig odd;
    odd.decay_factor = 0.3;
    odd.decay_epochs = {2};
    CHECK(lr_at(odd, 2) == doctest::Approx(0.015).epsilon(1e-15));
}

TEST_CASE("train config keys")
{
    std::istringstream text("train.epochs = 7\ntrain.decay_epochs = 3,5\ntrain.base_lr = 0.1\n");
    auto file = model::ConfigFile::parse(text);
    TrainConfig c;
    c.apply(file);
    CHECK(c.epochs == 7);
    CHECK(c.decay_epochs == std::vector<std::size_t>{3, 5});
    CHECK(c.base_lr == 0.1);
    CHECK(file.unused().empty());

    std::istringstream unsorted_text("train.decay_epochs = 5,3\n");
    auto unsorted = model::ConfigFile::parse(unsorted_text);
    CHECK_THROWS_AS(TrainConfig{}.apply(unsorted), model::ConfigError);
    std::istringstream zero_text("train.base_lr = 0\n");
    auto zero = model::ConfigFile::parse(zero_text);
    CHECK_THROWS_AS(TrainConfig{}.apply(zero), model::ConfigError);
}

TEST_CASE("top-k examples")
{
    std::vector<std::vector<double>> one_hot{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(top_k_accuracy(one_hot, {0, 1, 2}, 1) == 1.0);
    CHECK(top_k_accuracy(one_hot, {0, 1, 2}, 5) == 1.0);

    std::vector<std::vector<double>> third;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> row(10);
        for (int c = 0; c < 10; ++c) row[static_cast<std::size_t>(c)] = 0.01 * (10 - ((c - i + 2 + 10) % 10));
        third.push_back(row);
        labels.push_back(i);
    }
    CHECK(top_k_accuracy(third, labels, 1) == 0.0);
    CHECK(top_k_accuracy(third, labels, 3) == 1.0);
    CHECK(top_k_accuracy(third, labels, 5) == 1.0);

    CHECK_THROWS_AS(top_k_accuracy(std::vector<std::vector<double>>{}, {}, 1), std::invalid_argument);
}

TEST_CASE("score fusion examples")
{
    ScoreFile a, b;
    a.add("s0", {0.6, 0.4});
    b.add("s0", {0.1, 0.9});
    auto fused = fuse_scores({a, b});
    CHECK(argmax(fused.rows[0]) == 1);
    CHECK(fused.rows[0][0] == doctest::Approx(0.35));
    CHECK(fused.rows[0][1] == doctest::Approx(0.65));

    ScoreFile c;
    c.add("s0", {0.2, 0.3, 0.5});
    c.add("s1", {0.7, 0.2, 0.1});
    c.add("s2", {0.1, 0.8, 0.1});
    auto self = fuse_scores({c, c});
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(argmax(self.rows[i]) == argmax(c.rows[i]));
    const std::map<std::string, int> labels{{"s0", 2}, {"s1", 1}, {"s2", 1}};
    CHECK(top_k_accuracy(fuse_scores({c, c, c}), labels, 1) == top_k_accuracy(c, labels, 1));

    ScoreFile d;
    d.add("s2", {0.5, 0.4, 0.1});
    d.add("s0", {0.1, 0.1, 0.8});
    d.add("s1", {0.3, 0.3, 0.4});
    auto w1 = fuse_scores({c, d}, {1.0, 2.5});
    auto w2 = fuse_scores({c, d}, {4.0, 10.0});
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(argmax(w1.rows[i]) == argmax(w2.rows[i]));
        double sum = 0;
        for (double v : w1.rows[i]) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    ScoreFile other;
    other.add("s9", {0.2, 0.3, 0.5});
    other.add("s1", {0.2, 0.3, 0.5});
    other.add("s2", {0.2, 0.3, 0.5});
    CHECK_THROWS_AS(fuse_scores({c, other}), std::invalid_argument);
    CHECK_THROWS_AS(fuse_scores({c, d}, {1.0}), std::invalid_argument);
}

TEST_CASE("score files round-trip through CSV")
{
    ScoreFile s;
    s.add("a", {0.123456789012, 0.876543210988});
    s.add("b", {1.0 / 3.0, 2.0 / 3.0});
    std::stringstream csv;
    s.write_csv(csv);
    CHECK(csv.str().rfind("sample_id,score_0,score_1\na,0.123456789,0.876543211\n", 0) == 0);
    auto back = ScoreFile::read_csv(csv);
    CHECK(back.sample_ids == s.sample_ids);
    CHECK(back.rows[1][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    std::istringstream bad("sample_id,score_0\na,x\n");
    CHECK_THROWS_AS(ScoreFile::read_csv(bad), std::invalid_argument);
}

TEST_CASE("zero learning rate leaves parameters unchanged")
{
    model::LstaNet net(model::reduced_config(4, 16), 3);
    auto data = data::synthetic_dataset({.classes = 4, .per_class = 2, .frames = 16});
    const auto before = flat_parameters(net);
    auto options = quick(1);
    options.config.decay_epochs = {0};
    options.config.decay_factor = 0.0;
    REQUIRE(lr_at(options.config, 0) == 0.0);
    train(net, data, options);
    CHECK(flat_parameters(net) == before);
}

TEST_CASE("training is deterministic and overfits the synthetic corpus")
{
    auto data = data::synthetic_dataset({});
    REQUIRE(data.size() == 16);
    auto options = quick(200);
    options.target_top1 = 1.0;
    std::ostringstream log;
    options.metrics_log = &log;

    model::LstaNet net(model::reduced_config(4, 32), 1);
    auto first = train(net, data, options);
    CHECK(first.history.back().top1 == 1.0);
    CHECK(first.history.size() <= 200);
    CHECK(first.best_epoch == first.history.size() - 1);
    CHECK(log.str().find("\"epoch\":0,\"lr\":0.05,") != std::string::npos);

    auto again = quick(5);
    model::LstaNet twin(model::reduced_config(4, 32), 1);
    auto second = train(twin, data, again);
    for (std::size_t e = 0; e < second.history.size(); ++e) CHECK(second.history[e].loss == first.history[e].loss);

    auto eval = evaluate(net, data, 5);
    CHECK(eval.scores.size() == 16);
    CHECK(eval.top5 >= eval.top1);
    for (const auto& row : eval.scores.rows) {
        double sum = 0;
        for (double v : row) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }

    first.best.restore(twin);
    CHECK(flat_parameters(twin) == flat_parameters(net));
}

TEST_CASE("non-finite losses abort with diagnostics")
{
    model::LstaNet net(model::reduced_config(4, 16), 3);
    auto data = data::synthetic_dataset({.classes = 4, .per_class = 2, .frames = 16});
    auto options = quick(3);
    options.config.base_lr = 1e300;
    try {
        train(net, data, options);
        FAIL("expected a training error");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
    CHECK_THROWS_AS(evaluate(net, data::InMemoryDataset{}), std::invalid_argument);
}

#include "lsta/engine/trainer.hpp"

#include "lsta/model/checkpoint.hpp"
#include "lsta/numerics/ops.hpp"
#include "lsta/numerics/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace lsta::engine {

namespace {

std::size_t correct(const std::vector<double>& probs, std::size_t classes, const std::vector<int>& labels)
{
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<double> row(probs.begin() + static_cast<std::ptrdiff_t>(i * classes),
                                probs.begin() + static_cast<std::ptrdiff_t>((i + 1) * classes));
        if (argmax(row) == static_cast<std::size_t>(labels[i])) ++hits;
    }
    return hits;
}

std::string join_ids(const std::vector<std::string>& ids)
{
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
    return out;
}

} // namespace

void write_metrics_line(std::ostream& out, const EpochMetrics& m)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "{\"epoch\":%zu,\"lr\":%.9g,\"loss\":%.9g,\"top1\":%.9g,\"seconds\":%.3f}", m.epoch,
                  m.lr, m.loss, m.top1, m.seconds);
    out << buf << '\n' << std::flush;
}

NetSnapshot NetSnapshot::capture(model::LstaNet& net)
{
    NetSnapshot s;
    for (auto* store : {&net.parameters(), &net.buffers()}) {
        for (const auto& [name, t] : *store) s.tensors.emplace_back(name, std::vector<double>(t.values().begin(), t.values().end()));
    }
    return s;
}

void NetSnapshot::restore(model::LstaNet& net) const
{
    for (const auto& [name, values] : tensors) {
        auto& store = net.parameters().contains(name) ? net.parameters() : net.buffers();
        auto target = store.at(name).mutable_values();
        if (target.size() != values.size()) throw std::invalid_argument("snapshot size mismatch for " + name);
        std::copy(values.begin(), values.end(), target.begin());
    }
}

TrainResult train(model::LstaNet& net, const data::Dataset& dataset, const TrainOptions& options)
{
    const auto& config = options.config;
    config.validate();
    if (dataset.size() == 0) throw std::invalid_argument("cannot train on an empty dataset");
    const auto classes = net.config().num_classes;

    OptimizerState optimizer;
    optimizer.momentum = config.momentum;
    optimizer.nesterov = config.nesterov;
    optimizer.weight_decay = config.weight_decay;
    optimizer.round_to_float = true;

    TrainResult result;
    std::optional<std::pair<double, double>> best_key;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        optimizer.learning_rate = lr_at(config, epoch);
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (const auto& indices : data::epoch_batches(dataset.size(), config.batch_size, config.seed, epoch)) {
            auto batch = data::make_batch(dataset, indices);
            double loss_value = 0.0;
            try {
                auto logits = net.forward(batch.data, true);
                auto loss = ops::softmax_cross_entropy(logits, batch.labels);
                loss_value = loss.item();
                if (!std::isfinite(loss_value)) throw NumericError("loss is " + std::to_string(loss_value));
                hits += correct(ops::softmax_rows(logits), classes, batch.labels);
                loss.backward();
                sgd_nesterov_step(net.parameters(), optimizer);
            } catch (const NumericError& e) {
                throw TrainingError("non-finite value at epoch " + std::to_string(epoch) + ", lr " +
                                    std::to_string(optimizer.learning_rate) + ", batch [" + join_ids(batch.sample_ids) +
                                    "]: " + e.what());
            }
            loss_sum += loss_value * static_cast<double>(indices.size());
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.lr = optimizer.learning_rate;
        m.loss = loss_sum / static_cast<double>(dataset.size());
        m.top1 = static_cast<double>(hits) / static_cast<double>(dataset.size());
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(m);
        if (options.metrics_log) write_metrics_line(*options.metrics_log, m);
        if (options.on_epoch) options.on_epoch(m);

        const std::pair<double, double> key{m.top1, -m.loss};
        if (!best_key || key > *best_key) {
            best_key = key;
            result.best_epoch = epoch;
            result.best = NetSnapshot::capture(net);
            if (!options.checkpoint_path.empty()) {
                model::save_checkpoint(net, options.checkpoint_path,
                                       {static_cast<std::uint32_t>(epoch), config.seed});
            }
        }
        if (options.target_top1 && m.top1 >= *options.target_top1) break;
    }
    return result;
}

EvalResult evaluate(model::LstaNet& net, const data::Dataset& dataset, std::size_t batch_size)
{
    if (dataset.size() == 0) throw std::invalid_argument("cannot evaluate an empty dataset");
    NoGradGuard no_grad;
    const auto classes = net.config().num_classes;
    EvalResult result;
    std::vector<int> labels;
    for (const auto& indices : data::epoch_batches(dataset.size(), batch_size, 0, 0, false)) {
        auto batch = data::make_batch(dataset, indices);
        const auto probs = ops::softmax_rows(net.forward(batch.data, false));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            result.scores.add(batch.sample_ids[i],
                              std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(i * classes),
                                                  probs.begin() + static_cast<std::ptrdiff_t>((i + 1) * classes)));
            labels.push_back(batch.labels[i]);
        }
    }
    result.top1 = top_k_accuracy(result.scores.rows, labels, 1);
    result.top5 = top_k_accuracy(result.scores.rows, labels, 5);
    return result;
}

} // namespace lsta::engine

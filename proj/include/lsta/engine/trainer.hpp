#pragma once

#include "lsta/data/dataset.hpp"
#include "lsta/engine/schedule.hpp"
#include "lsta/engine/scores.hpp"
#include "lsta/model/lsta_net.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsta::engine {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0; ///< mean over samples
    double top1 = 0.0; ///< training-mode predictions
    double seconds = 0.0;
};

/// One JSON object per line.
void write_metrics_line(std::ostream& out, const EpochMetrics& m);

/// Copy of every parameter and buffer value, by name.
struct NetSnapshot {
    std::vector<std::pair<std::string, std::vector<double>>> tensors;

    static NetSnapshot capture(model::LstaNet& net);
    void restore(model::LstaNet& net) const;
};

struct TrainOptions {
    TrainConfig config;
    /// Stop after the first epoch whose training accuracy reaches this.
    std::optional<double> target_top1;
    std::ostream* metrics_log = nullptr;
    /// Written whenever the best epoch improves.
    std::string checkpoint_path;
    std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    NetSnapshot best;
};

/// SGD with Nesterov momentum on softmax cross-entropy. The net is left at
/// its final state; the best epoch (highest top-1, then lowest loss) is
/// kept in the result. Shuffling depends only on (seed, epoch).
TrainResult train(model::LstaNet& net, const data::Dataset& dataset, const TrainOptions& options);

struct EvalResult {
    double top1 = 0.0;
    double top5 = 0.0;
    ScoreFile scores;
};

EvalResult evaluate(model::LstaNet& net, const data::Dataset& dataset, std::size_t batch_size = 64);

} // namespace lsta::engine

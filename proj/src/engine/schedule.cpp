#include "lsta/engine/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lsta::engine {

void TrainConfig::validate() const
{
    if (epochs == 0) throw model::ConfigError("train.epochs must be positive");
    if (!(base_lr > 0.0)) throw model::ConfigError("train.base_lr must be positive");
    if (!std::is_sorted(decay_epochs.begin(), decay_epochs.end())) {
        throw model::ConfigError("train.decay_epochs must be sorted ascending");
    }
    if (!(decay_factor >= 0.0) || decay_factor > 1.0) throw model::ConfigError("train.decay_factor must lie in [0, 1]");
    if (momentum < 0.0 || momentum >= 1.0) throw model::ConfigError("train.momentum must lie in [0, 1)");
    if (weight_decay < 0.0) throw model::ConfigError("train.weight_decay must be non-negative");
    if (batch_size == 0) throw model::ConfigError("train.batch_size must be positive");
}

void TrainConfig::apply(model::ConfigFile& file)
{
    if (auto v = file.take("train.epochs")) epochs = model::parse_size("train.epochs", *v);
    if (auto v = file.take("train.base_lr")) base_lr = model::parse_real("train.base_lr", *v);
    if (auto v = file.take("train.decay_epochs")) decay_epochs = model::parse_size_list("train.decay_epochs", *v);
    if (auto v = file.take("train.decay_factor")) decay_factor = model::parse_real("train.decay_factor", *v);
    if (auto v = file.take("train.momentum")) momentum = model::parse_real("train.momentum", *v);
    if (auto v = file.take("train.nesterov")) nesterov = model::parse_bool("train.nesterov", *v);
    if (auto v = file.take("train.weight_decay")) weight_decay = model::parse_real("train.weight_decay", *v);
    if (auto v = file.take("train.batch_size")) batch_size = model::parse_size("train.batch_size", *v);
    if (auto v = file.take("train.seed")) seed = model::parse_size("train.seed", *v);
    validate();
}

std::vector<std::pair<std::string, std::string>> TrainConfig::to_key_values() const
{
    auto real = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", x);
        return std::string(buf);
    };
    return {{"train.epochs", std::to_string(epochs)},
            {"train.base_lr", real(base_lr)},
            {"train.decay_epochs", model::join_sizes(decay_epochs)},
            {"train.decay_factor", real(decay_factor)},
            {"train.momentum", real(momentum)},
            {"train.nesterov", nesterov ? "true" : "false"},
            {"train.weight_decay", real(weight_decay)},
            {"train.batch_size", std::to_string(batch_size)},
            {"train.seed", std::to_string(seed)}};
}

double lr_at(const TrainConfig& config, std::size_t epoch)
{
    const auto passed = static_cast<int>(
        std::upper_bound(config.decay_epochs.begin(), config.decay_epochs.end(), epoch) - config.decay_epochs.begin());
    // Dividing by an integral reciprocal (10 for 0.1) gives the correctly
    // rounded decimal; repeated multiplication by 0.1 drifts by an ulp.
    const double inverse = 1.0 / config.decay_factor;
    if (inverse == std::round(inverse)) return config.base_lr / std::pow(inverse, passed);
    return config.base_lr * std::pow(config.decay_factor, passed);
}

} // namespace lsta::engine

#pragma once

#include "lsta/model/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lsta::engine {

struct TrainConfig {
    std::size_t epochs = 100;
    double base_lr = 0.05;
    std::vector<std::size_t> decay_epochs{40, 60, 80, 100};
    double decay_factor = 0.1;
    double momentum = 0.9;
    bool nesterov = true;
    double weight_decay = 5e-4;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;

    void validate() const;
    /// Consumes the train.* keys.
    void apply(model::ConfigFile& file);
    std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

/// base_lr * decay_factor^(number of decay epochs <= epoch).
double lr_at(const TrainConfig& config, std::size_t epoch);

} // namespace lsta::engine

#pragma once

#include "lsta/numerics/tensor.hpp"

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lsta {

/// Named tensors in insertion order. Entries share storage with the
/// modules that registered them.
class ParameterStore {
public:
    void add(const std::string& name, Tensor tensor);
    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    const Tensor& at(const std::string& name) const;
    Tensor& at(const std::string& name);
    std::size_t size() const { return entries_.size(); }
    std::size_t element_count() const;

    void zero_grad();
    void clear_grad();

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct OptimizerState {
    double learning_rate = 0.05;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    bool nesterov = true;
    /// Round updated parameters to the nearest float so checkpoints
    /// (32-bit on disk) round-trip exactly.
    bool round_to_float = false;
    std::unordered_map<std::string, std::vector<double>> velocity;
};

/// g' = g + wd*p; v <- mu*v + g'; p <- p - lr*(g' + mu*v) (Nesterov) or
/// p <- p - lr*v. Clears gradients afterwards.
void sgd_nesterov_step(ParameterStore& params, OptimizerState& state);

} // namespace lsta

#include "lsta/numerics/optimizer.hpp"

#include <cmath>

namespace lsta {

void ParameterStore::add(const std::string& name, Tensor tensor)
{
    if (!tensor.defined()) throw std::invalid_argument("ParameterStore: undefined tensor for " + name);
    if (!index_.emplace(name, entries_.size()).second) {
        throw std::invalid_argument("ParameterStore: duplicate name " + name);
    }
    entries_.emplace_back(name, std::move(tensor));
}

const Tensor& ParameterStore::at(const std::string& name) const
{
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParameterStore: unknown name " + name);
    return entries_[it->second].second;
}

Tensor& ParameterStore::at(const std::string& name)
{
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParameterStore: unknown name " + name);
    return entries_[it->second].second;
}

std::size_t ParameterStore::element_count() const
{
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.size();
    return n;
}

void ParameterStore::zero_grad()
{
    for (auto& [name, t] : entries_) t.zero_grad();
}

void ParameterStore::clear_grad()
{
    for (auto& [name, t] : entries_) t.clear_grad();
}

void sgd_nesterov_step(ParameterStore& params, OptimizerState& state)
{
    if (!(state.learning_rate >= 0.0) || state.momentum < 0.0 || state.momentum >= 1.0 ||
        state.weight_decay < 0.0) {
        throw std::invalid_argument("sgd_nesterov_step: invalid hyper-parameters");
    }
    for (auto& [name, p] : params) {
        if (!p.has_grad()) throw std::logic_error("sgd_nesterov_step: missing gradient for " + name);
    }
    const double lr = state.learning_rate, mu = state.momentum, wd = state.weight_decay;
    for (auto& [name, p] : params) {
        auto values = p.mutable_values();
        auto grad = p.grad();
        auto& v = state.velocity[name];
        if (v.empty()) v.assign(values.size(), 0.0);
        if (v.size() != values.size()) throw ShapeError("sgd_nesterov_step: velocity shape mismatch for " + name);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = grad[i] + wd * values[i];
            v[i] = mu * v[i] + g;
            double next = state.nesterov ? values[i] - lr * (g + mu * v[i]) : values[i] - lr * v[i];
            if (state.round_to_float) next = static_cast<float>(next);
            if (!std::isfinite(next)) throw NumericError("sgd_nesterov_step: non-finite update for " + name);
            values[i] = next;
        }
        p.clear_grad();
    }
}

} // namespace lsta

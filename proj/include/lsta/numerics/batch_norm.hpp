#pragma once

#include "lsta/numerics/tensor.hpp"

namespace lsta {

class ParameterStore;

namespace ops {

/// Per-channel normalization of x[N,C,...] over every axis but 1.
/// In training mode batch statistics are used and the running buffers are
/// updated (unbiased variance); in eval mode the running buffers are used.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, double momentum, double eps, bool training);

} // namespace ops

class BatchNorm {
public:
    static constexpr double default_eps = 1e-5;
    static constexpr double default_momentum = 0.1;

    BatchNorm() = default;
    explicit BatchNorm(std::size_t channels);

    Tensor forward(const Tensor& x, bool training);
    std::size_t channels() const { return gamma_.size(); }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;
    void register_buffers(ParameterStore& buffers, const std::string& prefix) const;

    Tensor& gamma() { return gamma_; }
    Tensor& beta() { return beta_; }

private:
    Tensor gamma_;
    Tensor beta_;
    Tensor running_mean_;
    Tensor running_var_;
};

} // namespace lsta

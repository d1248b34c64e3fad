#pragma once

#include "lsta/layers/block.hpp"
#include "lsta/model/config.hpp"

#include <cstdint>
#include <memory>

namespace lsta::model {

/// Input batch norm, three LSTA blocks, global average pooling, mean over
/// persons and a linear classifier (no bias).
class LstaNet {
public:
    LstaNet(const LstaNetConfig& config, std::uint64_t seed);

    /// x[N,C,T,V,M] -> logits[N,num_classes].
    Tensor forward(const Tensor& x, bool training);

    const LstaNetConfig& config() const { return config_; }
    std::size_t vertex_count() const { return vertex_count_; }
    layers::LstaBlock& block(std::size_t i) { return *blocks_.at(i); }
    std::size_t block_count() const { return blocks_.size(); }

    /// Learnable tensors, sharing storage with the net.
    ParameterStore& parameters() { return params_; }
    /// Batch-norm running statistics.
    ParameterStore& buffers() { return buffers_; }

private:
    LstaNetConfig config_;
    std::size_t vertex_count_;
    BatchNorm input_bn_;
    std::vector<std::unique_ptr<layers::LstaBlock>> blocks_;
    Tensor classifier_;
    ParameterStore params_;
    ParameterStore buffers_;
};

} // namespace lsta::model

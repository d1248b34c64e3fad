#include "lsta/layers/block.hpp"

#include "lsta/numerics/ops.hpp"

namespace lsta::layers {

LstaBlock::LstaBlock(graph::MultiScaleAdjacency adjacency, std::size_t in_channels, std::size_t out_channels,
                     std::size_t stride, const BlockOptions& options, Rng& rng)
    : msda_(std::move(adjacency), in_channels, out_channels, options.msda, rng),
      msda_residual_(options.msda_residual && in_channels == out_channels)
{
    for (std::size_t i = 0; i < atpa_count; ++i) {
        atpa_.emplace_back(out_channels, out_channels, i == 0 ? stride : 1, options.tpa,
                           options.temporal_attention, rng);
    }
}

Tensor LstaBlock::forward(const Tensor& x, bool training)
{
    Tensor y = msda_.forward(x, training);
    if (msda_residual_) y = ops::add(y, x);
    for (auto& layer : atpa_) y = layer.forward(y, training);
    return y;
}

void LstaBlock::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    msda_.register_parameters(params, prefix + ".msda");
    for (std::size_t i = 0; i < atpa_.size(); ++i) {
        atpa_[i].register_parameters(params, prefix + ".atpa." + std::to_string(i));
    }
}

void LstaBlock::register_buffers(ParameterStore& buffers, const std::string& prefix) const
{
    msda_.register_buffers(buffers, prefix + ".msda");
    for (std::size_t i = 0; i < atpa_.size(); ++i) {
        atpa_[i].register_buffers(buffers, prefix + ".atpa." + std::to_string(i));
    }
}

} // namespace lsta::layers

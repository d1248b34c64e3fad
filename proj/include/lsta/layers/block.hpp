#pragma once

#include "lsta/layers/atpa.hpp"
#include "lsta/layers/msda.hpp"

#include <array>

namespace lsta::layers {

struct BlockOptions {
    MsdaOptions msda;
    TpaOptions tpa;
    /// Attention inside every ATPA; nullopt gives plain TPA + residual.
    std::optional<MamOptions> temporal_attention = MamOptions{};
    /// Identity shortcut around MSDA when its channel counts match.
    bool msda_residual = true;
};

/// One MSDA followed by three ATPA modules. A temporal stride is carried by
/// the first ATPA.
class LstaBlock {
public:
    static constexpr std::size_t atpa_count = 3;

    LstaBlock(graph::MultiScaleAdjacency adjacency, std::size_t in_channels, std::size_t out_channels,
              std::size_t stride, const BlockOptions& options, Rng& rng);

    Tensor forward(const Tensor& x, bool training);

    MsdaLayer& msda() { return msda_; }
    AtpaLayer& atpa(std::size_t i) { return atpa_.at(i); }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;
    void register_buffers(ParameterStore& buffers, const std::string& prefix) const;

private:
    MsdaLayer msda_;
    std::vector<AtpaLayer> atpa_;
    bool msda_residual_;
};

} // namespace lsta::layers

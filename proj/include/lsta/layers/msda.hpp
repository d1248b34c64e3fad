#pragma once

#include "lsta/graph/adjacency.hpp"
#include "lsta/layers/mam.hpp"
#include "lsta/numerics/batch_norm.hpp"

#include <optional>

namespace lsta::layers {

struct MsdaOptions {
    bool batch_norm = true;
    /// Attach channel attention to the spatial output (A-SDA variant).
    std::optional<MamOptions> attention;
};

/// Multi-scale spatial aggregation: per frame,
/// relu(bn(sum_k (A*_k + mask_k) X_t W_k)), optionally followed by MAM.
class MsdaLayer {
public:
    MsdaLayer(graph::MultiScaleAdjacency adjacency, std::size_t in_channels, std::size_t out_channels,
              const MsdaOptions& options, Rng& rng);

    Tensor forward(const Tensor& x, bool training);

    std::size_t in_channels() const { return in_channels_; }
    std::size_t out_channels() const { return out_channels_; }
    const graph::MultiScaleAdjacency& adjacency() const { return adjacency_; }
    Tensor& weight(std::size_t scale) { return weights_.at(scale); }
    std::size_t scale_count() const { return weights_.size(); }
    MamLayer* attention() { return attention_ ? &*attention_ : nullptr; }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;
    void register_buffers(ParameterStore& buffers, const std::string& prefix) const;

private:
    graph::MultiScaleAdjacency adjacency_;
    std::size_t in_channels_;
    std::size_t out_channels_;
    std::vector<Tensor> weights_;
    std::optional<BatchNorm> bn_;
    std::optional<MamLayer> attention_;
};

} // namespace lsta::layers

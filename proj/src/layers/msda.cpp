#include "lsta/layers/msda.hpp"

#include "lsta/layers/init.hpp"
#include "lsta/numerics/ops.hpp"

namespace lsta::layers {

MsdaLayer::MsdaLayer(graph::MultiScaleAdjacency adjacency, std::size_t in_channels, std::size_t out_channels,
                     const MsdaOptions& options, Rng& rng)
    : adjacency_(std::move(adjacency)), in_channels_(in_channels), out_channels_(out_channels)
{
    if (in_channels == 0 || out_channels == 0) throw std::invalid_argument("MsdaLayer: channels must be positive");
    // fan-in counts every scale feeding an output channel
    const std::size_t fan_in = in_channels * adjacency_.scale_count();
    for (std::size_t k = 0; k < adjacency_.scale_count(); ++k) {
        weights_.push_back(uniform_fan_in({out_channels, in_channels}, fan_in, rng));
    }
    if (options.batch_norm) bn_.emplace(out_channels);
    if (options.attention) attention_.emplace(*options.attention, rng);
}

Tensor MsdaLayer::forward(const Tensor& x, bool training)
{
    if (x.rank() != 4) throw ShapeError("MsdaLayer: expected [N,C,T,V] input");
    if (x.dim(3) != adjacency_.vertex_count()) {
        throw ShapeError("MsdaLayer: input has " + std::to_string(x.dim(3)) + " joints, graph has " +
                         std::to_string(adjacency_.vertex_count()));
    }
    if (x.dim(1) != in_channels_) throw ShapeError("MsdaLayer: input channel mismatch");
    std::vector<Tensor> terms;
    terms.reserve(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        terms.push_back(ops::pointwise_transform(ops::graph_aggregate(x, adjacency_.effective(k)), weights_[k]));
    }
    Tensor y = terms.size() == 1 ? terms.front() : ops::add_n(terms);
    if (bn_) y = bn_->forward(y, training);
    y = ops::relu(y);
    if (attention_) y = attention_->forward(y);
    return y;
}

void MsdaLayer::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    for (std::size_t k = 0; k < weights_.size(); ++k) params.add(prefix + ".weight." + std::to_string(k), weights_[k]);
    adjacency_.register_masks(params, prefix + ".mask");
    if (bn_) bn_->register_parameters(params, prefix + ".bn");
    if (attention_) attention_->register_parameters(params, prefix + ".mam");
}

void MsdaLayer::register_buffers(ParameterStore& buffers, const std::string& prefix) const
{
    if (bn_) bn_->register_buffers(buffers, prefix + ".bn");
}

} // namespace lsta::layers

#include "lsta/layers/mam.hpp"

#include "lsta/layers/init.hpp"
#include "lsta/numerics/ops.hpp"

#include <stdexcept>

namespace lsta::layers {

MamLayer::MamLayer(const MamOptions& options, Rng& rng) : options_(options)
{
    if (options_.kernel % 2 == 0) throw std::invalid_argument("MamLayer: kernel size must be odd");
    if (options_.dilations.empty()) throw std::invalid_argument("MamLayer: at least one dilation required");
    for (auto d : options_.dilations) {
        if (d < 1) throw std::invalid_argument("MamLayer: dilations must be >= 1");
        kernels_.push_back(uniform_fan_in({options_.kernel}, options_.kernel, rng));
    }
}

std::vector<Tensor> MamLayer::branch_responses(const Tensor& descriptor) const
{
    std::vector<Tensor> out;
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
        out.push_back(ops::channel_conv1d(descriptor, kernels_[b], options_.dilations[b]));
    }
    return out;
}

Tensor MamLayer::attention(const Tensor& x) const
{
    Tensor descriptor = options_.pooling == Pooling::Max ? ops::adaptive_max_pool_2d(x) : ops::global_avg_pool(x);
    auto responses = branch_responses(descriptor);
    if (options_.order == GateOrder::MaxThenSigmoid) {
        Tensor peak = responses.front();
        for (std::size_t b = 1; b < responses.size(); ++b) peak = ops::maximum(peak, responses[b]);
        return ops::sigmoid(peak);
    }
    Tensor peak = ops::sigmoid(responses.front());
    for (std::size_t b = 1; b < responses.size(); ++b) peak = ops::maximum(peak, ops::sigmoid(responses[b]));
    return peak;
}

Tensor MamLayer::forward(const Tensor& x)
{
    if (x.rank() != 4) throw ShapeError("MamLayer: expected [N,C,T,V] input");
    Tensor weights = attention(x);
    last_attention_ = weights.detach();
    return ops::channel_scale(x, weights);
}

void MamLayer::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
        params.add(prefix + ".kernel." + std::to_string(b), kernels_[b]);
    }
}

} // namespace lsta::layers

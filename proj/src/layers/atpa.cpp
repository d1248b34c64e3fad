#include "lsta/layers/atpa.hpp"

#include "lsta/layers/init.hpp"
#include "lsta/numerics/ops.hpp"

namespace lsta::layers {

AtpaLayer::AtpaLayer(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
                     const TpaOptions& tpa, const std::optional<MamOptions>& attention, Rng& rng)
    : tpa_(in_channels, out_channels, stride, tpa, rng), stride_(stride)
{
    if (attention) attention_.emplace(*attention, rng);
    if (in_channels != out_channels) {
        projection_ = uniform_fan_in({out_channels, in_channels}, in_channels, rng);
        if (tpa.batch_norm) projection_bn_.emplace(out_channels);
    }
}

Tensor AtpaLayer::residual(const Tensor& x, bool training)
{
    Tensor r = stride_ > 1 ? ops::temporal_subsample(x, stride_) : x;
    if (!projection_.defined()) return r;
    r = ops::pointwise_transform(r, projection_);
    return projection_bn_ ? projection_bn_->forward(r, training) : r;
}

Tensor AtpaLayer::forward(const Tensor& x, bool training)
{
    Tensor y = tpa_.forward(x, training);
    if (attention_) y = attention_->forward(y);
    return ops::add(y, residual(x, training));
}

void AtpaLayer::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    tpa_.register_parameters(params, prefix + ".tpa");
    if (attention_) attention_->register_parameters(params, prefix + ".mam");
    if (projection_.defined()) params.add(prefix + ".residual.weight", projection_);
    if (projection_bn_) projection_bn_->register_parameters(params, prefix + ".residual.bn");
}

void AtpaLayer::register_buffers(ParameterStore& buffers, const std::string& prefix) const
{
    tpa_.register_buffers(buffers, prefix + ".tpa");
    if (projection_bn_) projection_bn_->register_buffers(buffers, prefix + ".residual.bn");
}

} // namespace lsta::layers

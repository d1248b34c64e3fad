#include "lsta/layers/tpa.hpp"

#include "lsta/layers/init.hpp"
#include "lsta/numerics/ops.hpp"

namespace lsta::layers {

TpaLayer::TpaLayer(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
                   const TpaOptions& options, Rng& rng)
    : options_(options), stride_(stride)
{
    const std::size_t s = options.fragments;
    if (s == 0 || out_channels % s != 0) {
        throw std::invalid_argument("TpaLayer: " + std::to_string(out_channels) +
                                    " channels not divisible into " + std::to_string(s) + " fragments");
    }
    if (options.kernel % 2 == 0) throw std::invalid_argument("TpaLayer: kernel size must be odd");
    if (stride < 1) throw std::invalid_argument("TpaLayer: stride must be >= 1");
    width_ = out_channels / s;
    dilations_ = options.dilations;
    if (dilations_.empty()) {
        for (std::size_t f = 1; f <= s; ++f) dilations_.push_back(f);
    }
    if (dilations_.size() != s) throw std::invalid_argument("TpaLayer: one dilation per fragment required");
    for (auto d : dilations_) {
        if (d < 1) throw std::invalid_argument("TpaLayer: dilations must be >= 1");
    }

    for (std::size_t f = 0; f < s; ++f) {
        embeds_.push_back(uniform_fan_in({width_, in_channels}, in_channels, rng));
        embed_bn_.emplace_back(options.batch_norm ? std::optional<BatchNorm>(width_) : std::nullopt);
        if (f == 0 && options.identity_first_fragment) {
            convs_.emplace_back();
            conv_bn_.emplace_back();
            continue;
        }
        convs_.push_back(uniform_fan_in({width_, width_, options.kernel}, width_ * options.kernel, rng));
        conv_bn_.emplace_back(options.batch_norm ? std::optional<BatchNorm>(width_) : std::nullopt);
    }
}

std::size_t TpaLayer::receptive_radius(std::size_t fragment) const
{
    std::size_t radius = 0;
    for (std::size_t f = 0; f <= fragment; ++f) {
        if (f == 0 && options_.identity_first_fragment) continue;
        radius += dilations_[f] * (options_.kernel / 2);
    }
    return radius;
}

Tensor TpaLayer::post(const Tensor& y, std::optional<BatchNorm>& bn, bool training) const
{
    Tensor out = bn ? bn->forward(y, training) : y;
    return options_.activation ? ops::relu(out) : out;
}

std::vector<Tensor> TpaLayer::fragment_outputs(const Tensor& x, bool training)
{
    if (x.rank() != 4) throw ShapeError("TpaLayer: expected [N,C,T,V] input");
    if (x.dim(1) != embeds_.front().dim(1)) throw ShapeError("TpaLayer: input channel mismatch");
    Tensor source = stride_ > 1 ? ops::temporal_subsample(x, stride_) : x;
    std::vector<Tensor> outputs;
    for (std::size_t f = 0; f < embeds_.size(); ++f) {
        Tensor fragment = post(ops::pointwise_transform(source, embeds_[f]), embed_bn_[f], training);
        if (f > 0) fragment = ops::add(fragment, outputs.back());
        if (!convs_[f].defined()) {
            outputs.push_back(fragment);
            continue;
        }
        Tensor conv = ops::temporal_dilated_conv(fragment, convs_[f], dilations_[f], 1);
        outputs.push_back(post(conv, conv_bn_[f], training));
    }
    return outputs;
}

Tensor TpaLayer::forward(const Tensor& x, bool training)
{
    auto outputs = fragment_outputs(x, training);
    return ops::concat_channels(outputs);
}

void TpaLayer::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    for (std::size_t f = 0; f < embeds_.size(); ++f) {
        const auto tag = std::to_string(f);
        params.add(prefix + ".embed." + tag, embeds_[f]);
        if (embed_bn_[f]) embed_bn_[f]->register_parameters(params, prefix + ".embed_bn." + tag);
        if (convs_[f].defined()) params.add(prefix + ".conv." + tag, convs_[f]);
        if (conv_bn_[f]) conv_bn_[f]->register_parameters(params, prefix + ".conv_bn." + tag);
    }
}

void TpaLayer::register_buffers(ParameterStore& buffers, const std::string& prefix) const
{
    for (std::size_t f = 0; f < embeds_.size(); ++f) {
        const auto tag = std::to_string(f);
        if (embed_bn_[f]) embed_bn_[f]->register_buffers(buffers, prefix + ".embed_bn." + tag);
        if (conv_bn_[f]) conv_bn_[f]->register_buffers(buffers, prefix + ".conv_bn." + tag);
    }
}

} // namespace lsta::layers

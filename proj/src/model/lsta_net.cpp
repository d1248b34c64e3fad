#include "lsta/model/lsta_net.hpp"

#include "lsta/layers/init.hpp"
#include "lsta/numerics/ops.hpp"

namespace lsta::model {

LstaNet::LstaNet(const LstaNetConfig& config, std::uint64_t seed) : config_(config)
{
    config_.validate();
    const auto g = config_.load_graph();
    vertex_count_ = g.vertex_count();
    Rng rng(seed);
    const auto base = graph::build_multiscale(g, config_.max_scale, config_.spatial_scheme, config_.with_masks,
                                              rng.next());
    input_bn_ = BatchNorm(config_.persons * vertex_count_ * config_.in_channels);

    const auto options = config_.block_options();
    std::size_t channels = config_.in_channels;
    for (std::size_t b = 0; b < config_.block_channels.size(); ++b) {
        blocks_.push_back(std::make_unique<layers::LstaBlock>(base.with_fresh_masks(rng), channels,
                                                              config_.block_channels[b], config_.block_strides[b],
                                                              options, rng));
        channels = config_.block_channels[b];
    }
    classifier_ = layers::uniform_fan_in({config_.num_classes, channels}, channels, rng);

    input_bn_.register_parameters(params_, "input_bn");
    input_bn_.register_buffers(buffers_, "input_bn");
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        blocks_[b]->register_parameters(params_, "block." + std::to_string(b));
        blocks_[b]->register_buffers(buffers_, "block." + std::to_string(b));
    }
    params_.add("classifier.weight", classifier_);
}

Tensor LstaNet::forward(const Tensor& x, bool training)
{
    const std::size_t c = config_.in_channels, t = config_.frames, v = vertex_count_, m = config_.persons;
    if (x.rank() != 5 || x.dim(1) != c || x.dim(2) != t || x.dim(3) != v || x.dim(4) != m) {
        throw ShapeError("LstaNet: expected input (N," + std::to_string(c) + "," + std::to_string(t) + "," +
                         std::to_string(v) + "," + std::to_string(m) + "), got " + shape_string(x.shape()));
    }
    const std::size_t n = x.dim(0);

    // normalize each (person, joint, coordinate) channel over batch and time
    static constexpr std::size_t to_mvct[] = {0, 4, 3, 1, 2};
    Tensor y = ops::reshape(ops::permute(x, to_mvct), {n, m * v * c, t, 1});
    y = input_bn_.forward(y, training);
    static constexpr std::size_t to_nmctv[] = {0, 1, 3, 4, 2};
    y = ops::reshape(ops::permute(ops::reshape(y, {n, m, v, c, t}), to_nmctv), {n * m, c, t, v});

    for (auto& block : blocks_) y = block->forward(y, training);
    y = ops::group_mean(ops::global_avg_pool(y), m);
    const std::size_t width = y.dim(1);
    y = ops::pointwise_transform(ops::reshape(y, {n, width, 1, 1}), classifier_);
    return ops::reshape(y, {n, config_.num_classes});
}

} // namespace lsta::model

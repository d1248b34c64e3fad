#pragma once

#include "lsta/numerics/batch_norm.hpp"
#include "lsta/numerics/optimizer.hpp"
#include "lsta/numerics/rng.hpp"

#include <optional>
#include <vector>

namespace lsta::layers {

struct TpaOptions {
    std::size_t fragments = 6;
    std::size_t kernel = 3;
    /// One rate per fragment; empty means d_s = s (1-based).
    std::vector<std::size_t> dilations;
    bool batch_norm = true;
    bool activation = true;
    /// Pass the first fragment through without a temporal convolution
    /// (Res2Net-style split) instead of convolving it.
    bool identity_first_fragment = false;
};

/// Temporal pyramid aggregation. The input is embedded into S fragments of
/// width C_out/S; fragment s is convolved after adding the previous
/// fragment's output, with increasing dilation, and the outputs are
/// concatenated. A temporal stride is applied once, at the embedding.
class TpaLayer {
public:
    TpaLayer(std::size_t in_channels, std::size_t out_channels, std::size_t stride, const TpaOptions& options,
             Rng& rng);

    Tensor forward(const Tensor& x, bool training);
    /// Per-fragment outputs, before concatenation.
    std::vector<Tensor> fragment_outputs(const Tensor& x, bool training);

    std::size_t fragments() const { return embeds_.size(); }
    std::size_t fragment_width() const { return width_; }
    std::size_t stride() const { return stride_; }
    std::size_t dilation(std::size_t fragment) const { return dilations_.at(fragment); }
    /// Frames on either side that can influence fragment s (0-based).
    std::size_t receptive_radius(std::size_t fragment) const;

    Tensor& embed_weight(std::size_t fragment) { return embeds_.at(fragment); }
    /// Undefined for fragment 0 when identity_first_fragment is set.
    Tensor& conv_weight(std::size_t fragment) { return convs_.at(fragment); }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;
    void register_buffers(ParameterStore& buffers, const std::string& prefix) const;

private:
    Tensor post(const Tensor& y, std::optional<BatchNorm>& bn, bool training) const;

    TpaOptions options_;
    std::size_t stride_;
    std::size_t width_;
    std::vector<std::size_t> dilations_;
    std::vector<Tensor> embeds_;
    std::vector<Tensor> convs_;
    std::vector<std::optional<BatchNorm>> embed_bn_;
    std::vector<std::optional<BatchNorm>> conv_bn_;
};

} // namespace lsta::layers

#pragma once

#include "lsta/layers/mam.hpp"
#include "lsta/layers/tpa.hpp"

#include <optional>

namespace lsta::layers {

/// y = mam(tpa(x)) + residual(x). The residual is the identity when shapes
/// match, a temporal subsample when only the stride differs, and a strided
/// pointwise projection with batch norm when channel counts differ.
class AtpaLayer {
public:
    AtpaLayer(std::size_t in_channels, std::size_t out_channels, std::size_t stride, const TpaOptions& tpa,
              const std::optional<MamOptions>& attention, Rng& rng);

    Tensor forward(const Tensor& x, bool training);

    TpaLayer& tpa() { return tpa_; }
    MamLayer* attention() { return attention_ ? &*attention_ : nullptr; }
    bool has_projection() const { return projection_.defined(); }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;
    void register_buffers(ParameterStore& buffers, const std::string& prefix) const;

private:
    Tensor residual(const Tensor& x, bool training);

    TpaLayer tpa_;
    std::optional<MamLayer> attention_;
    std::size_t stride_;
    Tensor projection_;
    std::optional<BatchNorm> projection_bn_;
};

} // namespace lsta::layers

#pragma once

#include "lsta/numerics/optimizer.hpp"
#include "lsta/numerics/rng.hpp"
#include "lsta/numerics/tensor.hpp"

#include <string>
#include <vector>

namespace lsta::layers {

enum class Pooling { Max, Average };

/// Where the element-wise maximum over dilation branches is taken relative
/// to the sigmoid gate. Both give the same weights since the sigmoid is
/// monotone.
enum class GateOrder { MaxThenSigmoid, SigmoidThenMax };

struct MamOptions {
    std::size_t kernel = 5;
    std::vector<std::size_t> dilations{1, 2, 3};
    Pooling pooling = Pooling::Max;
    GateOrder order = GateOrder::MaxThenSigmoid;
};

/// Maximum-response channel attention: a global (T,V) pool per channel,
/// parallel dilated 1-D convolutions across channels, element-wise max,
/// sigmoid gate, then channel re-weighting of the input.
class MamLayer {
public:
    MamLayer(const MamOptions& options, Rng& rng);

    Tensor forward(const Tensor& x);

    /// Gate weights omega_max in (0,1), shape [N,C].
    Tensor attention(const Tensor& x) const;
    /// Raw branch responses (one [N,C] tensor per dilation) for a descriptor.
    std::vector<Tensor> branch_responses(const Tensor& descriptor) const;

    /// Gate weights of the most recent forward call.
    const Tensor& last_attention() const { return last_attention_; }

    const MamOptions& options() const { return options_; }
    Tensor& kernel(std::size_t branch) { return kernels_.at(branch); }
    std::size_t parameter_count() const { return options_.kernel * options_.dilations.size(); }

    void register_parameters(ParameterStore& params, const std::string& prefix) const;

private:
    MamOptions options_;
    std::vector<Tensor> kernels_;
    Tensor last_attention_;
};

} // namespace lsta::layers

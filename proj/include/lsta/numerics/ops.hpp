#pragma once

#include "lsta/numerics/tensor.hpp"

#include <span>
#include <vector>

// Differentiable primitives. Feature maps use the N x C x T x V layout
// throughout (batch, channel, time, joint).
namespace lsta::ops {

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_n(std::span<const Tensor> terms);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Sum of all elements, returned as a one-element tensor.
Tensor sum(const Tensor& x);
/// Sum of x * weights over all elements (weights are treated as constants).
Tensor weighted_sum(const Tensor& x, std::span<const double> weights);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, std::span<const std::size_t> axes);

/// Concatenate along axis 1; all other extents must agree.
Tensor concat_channels(std::span<const Tensor> parts);
/// Channels [begin, end) of axis 1.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end);

/// x[N,C_in,T,V] * weight[C_out,C_in,k] along T with dilation and stride;
/// zero "same" padding of dilation*(k-1)/2, output length ceil(T/stride).
Tensor temporal_dilated_conv(const Tensor& x, const Tensor& weight, std::size_t dilation,
                             std::size_t stride);

/// Keeps frames 0, stride, 2*stride, ...; output length ceil(T/stride).
Tensor temporal_subsample(const Tensor& x, std::size_t stride);

/// Per-(t,v) product with weight[C_out,C_in]. No bias.
Tensor pointwise_transform(const Tensor& x, const Tensor& weight);

/// y[n,c,t,i] = sum_j adjacency[i,j] * x[n,c,t,j].
Tensor graph_aggregate(const Tensor& x, const Tensor& adjacency);

/// Global max over (T,V) per channel: [N,C,T,V] -> [N,C].
Tensor adaptive_max_pool_2d(const Tensor& x);
/// Global mean over (T,V) per channel: [N,C,T,V] -> [N,C].
Tensor global_avg_pool(const Tensor& x);

/// 1-D convolution across the channel axis of a descriptor c[N,C] with
/// kernel[k] (k odd), zero padding dilation*(k-1)/2.
Tensor channel_conv1d(const Tensor& c, const Tensor& kernel, std::size_t dilation);

/// x[N,C,...] scaled per (n,c) by weights[N,C].
Tensor channel_scale(const Tensor& x, const Tensor& weights);

/// Mean of consecutive row groups: x[B*G,C] -> [B,C].
Tensor group_mean(const Tensor& x, std::size_t group);

/// Row-wise softmax of logits[N,L] (no gradient).
std::vector<double> softmax_rows(const Tensor& logits);

/// Mean over the batch of -log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

} // namespace lsta::ops

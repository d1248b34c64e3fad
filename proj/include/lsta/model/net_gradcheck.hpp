#pragma once

#include "lsta/layers/gradient_suite.hpp"

namespace lsta::model {

/// Gradient check of sum(logits) for the reduced net on the 6-joint graph
/// (one sample of two persons, T=16, channels 12/24/48), over a random subset of the
/// parameters and the input.
layers::GradientCase reduced_net_gradcheck(std::uint64_t seed, std::size_t coordinates = 400,
                                           const GradcheckOptions& options = {.step = 1e-5});

} // namespace lsta::model

#pragma once

#include "lsta/numerics/rng.hpp"
#include "lsta/numerics/tensor.hpp"

#include <cmath>

namespace lsta::layers {

/// Learnable tensor drawn uniform in +-sqrt(1/fan_in), stored at float
/// precision.
inline Tensor uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng)
{
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = static_cast<float>(rng.uniform(-bound, bound));
    return Tensor(std::move(shape), std::move(values), true);
}

} // namespace lsta::layers

#pragma once

#include "lsta/numerics/optimizer.hpp"
#include "lsta/numerics/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace lsta {

struct GradcheckOptions {
    enum class Mode { Coordinates, Probes };

    /// Central-difference step, scaled per coordinate by max(1, |p|).
    double step = 1e-3;
    /// Floor of the relative-error denominator: the larger of `floor` and
    /// `relative_floor` times the largest analytic gradient magnitude, so
    /// components at rounding-noise level are judged against the gradient's
    /// scale.
    double floor = 1e-8;
    double relative_floor = 1e-4;
    std::uint64_t seed = 0;
    Mode mode = Mode::Coordinates;
    /// Coordinates mode: check at most this many coordinates, sampled
    /// uniformly over all parameters (0 checks every coordinate).
    std::size_t max_coordinates = 0;
    /// Probes mode: number of random unit directions.
    std::size_t probes = 8;
    /// Coordinates mode: extrapolate from steps h, h/2, h/4 and, when the
    /// two one-sided slopes disagree (a ReLU or max switch inside
    /// [p-h, p+h]), use the side whose slopes stay linear in h.
    bool kink_guard = true;
};

struct GradcheckReport {
    double max_relative_error = 0.0;
    std::size_t checks = 0;
    std::string worst; ///< "name[index]" or "probe k" of the largest error
};

/// Compares the reverse-mode gradient of the scalar `f` with respect to
/// every tensor in `params` against central finite differences.
/// `f` must be deterministic; non-finite values throw NumericError.
GradcheckReport finite_diff_gradcheck(const std::function<Tensor()>& f, ParameterStore& params,
                                      const GradcheckOptions& options = {});

} // namespace lsta

#pragma once

#include "lsta/layers/tpa.hpp"

#include <cstdint>
#include <vector>

namespace lsta::layers {

struct ImpulseFragment {
    std::size_t dilation = 0;
    std::size_t analytic_radius = 0;
    std::size_t measured_radius = 0;
    /// Sum of |y| per output frame.
    std::vector<double> profile;
};

struct ImpulseProbe {
    std::size_t frames = 0;
    std::size_t impulse_frame = 0;
    std::vector<ImpulseFragment> fragments;

    /// Every fragment's measured support equals its analytic radius.
    bool matches() const;
};

/// Unit impulse at the centre frame through a TPA layer with BN and
/// activation disabled and strictly positive weights, so that no
/// cancellation can hide part of the support. `frames` must exceed twice
/// the largest radius.
ImpulseProbe tpa_impulse_probe(TpaOptions options, std::size_t frames, std::uint64_t seed);

/// Largest |y_s - s| over all fragments when every embedding selects its
/// own channel, every temporal kernel is the centre tap, and the input is
/// all ones; zero when the fragments telescope into cumulative sums.
double tpa_telescoping_error(std::size_t fragments, std::size_t frames = 9);

} // namespace lsta::layers

#pragma once

#include "lsta/numerics/gradcheck.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lsta::layers {

struct GradientCase {
    std::string layer;
    std::string config;
    GradcheckReport report;
};

struct GradientSuiteOptions {
    std::size_t configs = 20;
    std::uint64_t seed = 2024;
    GradcheckOptions check{.step = 1e-4};
    /// Called after each case, e.g. for progress output.
    std::function<void(const GradientCase&)> on_case;
};

/// Random small configurations (V <= 6, T <= 12, C <= 12), each checked
/// with respect to parameters and input. Layer names: msda, tpa, mam, atpa,
/// block.
std::vector<GradientCase> run_layer_gradient_suite(const GradientSuiteOptions& options,
                                                   const std::vector<std::string>& layers = {});

} // namespace lsta::layers

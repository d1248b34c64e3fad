#pragma once

#include "lsta/model/lsta_net.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace lsta::model {

struct ParamRow {
    std::string module;
    std::size_t count = 0;
};

struct ParamTable {
    std::vector<ParamRow> rows;
    std::size_t total = 0;
};

/// Tally of the registered parameters, grouped by module
/// (input_bn, block.b.msda, block.b.atpa.i, classifier).
ParamTable param_count(LstaNet& net);

/// Closed-form count from the configuration alone.
namespace analytic {

std::size_t batch_norm(std::size_t channels);
std::size_t mam(std::size_t kernel, std::size_t branches);
std::size_t msda(std::size_t c_in, std::size_t c_out, std::size_t max_scale, std::size_t vertices, bool masks,
                 bool bn, std::size_t attention);
std::size_t tpa(std::size_t c_in, std::size_t c_out, std::size_t fragments, std::size_t kernel,
                bool identity_first, bool bn);
std::size_t atpa(std::size_t c_in, std::size_t c_out, std::size_t fragments, bool identity_first,
                 std::size_t attention);
ParamTable net(const LstaNetConfig& config, std::size_t vertices);

} // namespace analytic

void print_param_table(std::ostream& out, const ParamTable& table);

} // namespace lsta::model

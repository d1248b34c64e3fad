#include "lsta/model/net_gradcheck.hpp"

#include "lsta/model/lsta_net.hpp"
#include "lsta/numerics/ops.hpp"

namespace lsta::model {

layers::GradientCase reduced_net_gradcheck(std::uint64_t seed, std::size_t coordinates,
                                           const GradcheckOptions& options)
{
    auto config = reduced_config(5, 16);
    config.graph = "stick-6";
    LstaNet net(config, seed);

    Rng rng(derive_seed(seed, 1));
    std::vector<double> values(3 * 16 * 6 * 2);
    for (auto& v : values) v = rng.normal();
    Tensor x({1, 3, 16, 6, 2}, std::move(values), true);

    ParameterStore checked;
    for (auto& [name, tensor] : net.parameters()) checked.add(name, tensor);
    checked.add("input", x);

    GradcheckOptions opts = options;
    opts.seed = rng.next();
    opts.max_coordinates = coordinates;
    auto objective = [&] { return ops::sum(net.forward(x, true)); };
    return {"net", "reduced 12/24/48 N=1 M=2 V=6 T=16 K=8 seed=" + std::to_string(seed),
            finite_diff_gradcheck(objective, checked, opts)};
}

} // namespace lsta::model

#include "lsta/model/param_count.hpp"

#include <map>

namespace lsta::model {

namespace {

// "block.1.atpa.2.tpa.conv.3" -> "block.1.atpa.2"
std::string module_of(const std::string& name)
{
    if (name.rfind("block.", 0) != 0) return name.substr(0, name.find('.'));
    std::size_t pos = 0;
    for (int dots = 0; dots < 3; ++dots) {
        pos = name.find('.', pos + 1);
        if (pos == std::string::npos) return name;
    }
    const std::string head = name.substr(0, pos);
    if (head.size() > 5 && head.compare(head.size() - 5, 5, ".msda") == 0) return head;
    const auto next = name.find('.', pos + 1);
    return name.substr(0, next);
}

} // namespace

ParamTable param_count(LstaNet& net)
{
    ParamTable table;
    for (auto& [name, tensor] : net.parameters()) {
        const auto module = module_of(name);
        if (table.rows.empty() || table.rows.back().module != module) table.rows.push_back({module, 0});
        table.rows.back().count += tensor.size();
        table.total += tensor.size();
    }
    return table;
}

namespace analytic {

std::size_t batch_norm(std::size_t channels) { return 2 * channels; }

std::size_t mam(std::size_t kernel, std::size_t branches) { return kernel * branches; }

std::size_t msda(std::size_t c_in, std::size_t c_out, std::size_t max_scale, std::size_t vertices, bool masks,
                 bool bn, std::size_t attention)
{
    const std::size_t scales = max_scale + 1;
    return scales * c_in * c_out + (masks ? scales * vertices * vertices : 0) + (bn ? batch_norm(c_out) : 0) +
           attention;
}

std::size_t tpa(std::size_t c_in, std::size_t c_out, std::size_t fragments, std::size_t kernel,
                bool identity_first, bool bn)
{
    const std::size_t alpha = c_out / fragments;
    const std::size_t convs = identity_first ? fragments - 1 : fragments;
    const std::size_t embeds = fragments * (alpha * c_in + (bn ? batch_norm(alpha) : 0));
    return embeds + convs * (alpha * alpha * kernel + (bn ? batch_norm(alpha) : 0));
}

std::size_t atpa(std::size_t c_in, std::size_t c_out, std::size_t fragments, bool identity_first,
                 std::size_t attention)
{
    const std::size_t projection = c_in == c_out ? 0 : c_in * c_out + batch_norm(c_out);
    return tpa(c_in, c_out, fragments, 3, identity_first, true) + attention + projection;
}

ParamTable net(const LstaNetConfig& config, std::size_t vertices)
{
    ParamTable table;
    auto add = [&](std::string module, std::size_t count) {
        table.rows.push_back({std::move(module), count});
        table.total += count;
    };
    const std::size_t attention = mam(config.mam_kernel, config.mam_dilations.size());
    add("input_bn", batch_norm(config.persons * vertices * config.in_channels));
    std::size_t c_in = config.in_channels;
    for (std::size_t b = 0; b < config.block_channels.size(); ++b) {
        const std::size_t c_out = config.block_channels[b];
        const std::string prefix = "block." + std::to_string(b);
        add(prefix + ".msda", msda(c_in, c_out, config.max_scale, vertices, config.with_masks, true,
                                   config.spatial_attention ? attention : 0));
        for (std::size_t i = 0; i < 3; ++i) {
            add(prefix + ".atpa." + std::to_string(i),
                atpa(c_out, c_out, config.fragments, config.identity_first_fragment,
                     config.temporal_attention ? attention : 0));
        }
        c_in = c_out;
    }
    add("classifier", config.num_classes * c_in);
    return table;
}

} // namespace analytic

void print_param_table(std::ostream& out, const ParamTable& table)
{
    std::size_t width = 5;
    for (const auto& row : table.rows) width = std::max(width, row.module.size());
    for (const auto& row : table.rows) {
        out << row.module << std::string(width - row.module.size() + 2, ' ') << row.count << '\n';
    }
    out << "total" << std::string(width - 5 + 2, ' ') << table.total << '\n';
}

} // namespace lsta::model

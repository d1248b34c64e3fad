#include "lsta/model/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lsta::model {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ConfigFile ConfigFile::parse(std::istream& in)
{
    ConfigFile file;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
        if (file.has(key)) throw ConfigError("config line " + std::to_string(number) + ": duplicate key " + key);
        file.values_[key] = trim(line.substr(eq + 1));
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in);
}

std::optional<std::string> ConfigFile::take(const std::string& key)
{
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    taken_.insert(key);
    return it->second;
}

std::vector<std::string> ConfigFile::unused() const
{
    std::vector<std::string> keys;
    for (const auto& [key, value] : values_) {
        if (!taken_.count(key)) keys.push_back(key);
    }
    return keys;
}

std::size_t parse_size(const std::string& key, const std::string& text)
{
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used == text.size()) return value;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + text + "'");
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& text)
{
    std::vector<std::size_t> values;
    if (trim(text).empty()) return values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_size(key, trim(item)));
    return values;
}

std::string join_sizes(const std::vector<std::size_t>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string pooling_name(layers::Pooling pooling) { return pooling == layers::Pooling::Max ? "max" : "average"; }

layers::Pooling parse_pooling(const std::string& name)
{
    if (name == "max") return layers::Pooling::Max;
    if (name == "average" || name == "avg") return layers::Pooling::Average;
    throw ConfigError("unknown pooling '" + name + "' (expected max or average)");
}

namespace {

std::string order_name(layers::GateOrder order)
{
    return order == layers::GateOrder::MaxThenSigmoid ? "max-then-sigmoid" : "sigmoid-then-max";
}

layers::GateOrder parse_order(const std::string& name)
{
    if (name == "max-then-sigmoid") return layers::GateOrder::MaxThenSigmoid;
    if (name == "sigmoid-then-max") return layers::GateOrder::SigmoidThenMax;
    throw ConfigError("unknown mam_order '" + name + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

} // namespace

void LstaNetConfig::validate() const
{
    if (in_channels == 0) throw ConfigError("in_channels must be positive");
    if (block_channels.size() != 3 || block_strides.size() != 3) {
        throw ConfigError("block_channels and block_strides need exactly 3 entries");
    }
    if (fragments == 0) throw ConfigError("fragments must be positive");
    for (auto c : block_channels) {
        if (c == 0 || c % fragments != 0) {
            throw ConfigError("block channel count " + std::to_string(c) + " is not divisible by fragments=" +
                              std::to_string(fragments));
        }
    }
    for (auto s : block_strides) {
        if (s == 0) throw ConfigError("block strides must be positive");
    }
    if (!tpa_dilations.empty() && tpa_dilations.size() != fragments) {
        throw ConfigError("tpa_dilations needs one entry per fragment");
    }
    for (auto d : tpa_dilations) {
        if (d == 0) throw ConfigError("tpa_dilations must be positive");
    }
    if (mam_kernel % 2 == 0) throw ConfigError("mam_kernel must be odd");
    if (mam_dilations.empty()) throw ConfigError("mam_dilations must not be empty");
    for (auto d : mam_dilations) {
        if (d == 0) throw ConfigError("mam_dilations must be positive");
    }
    if (num_classes == 0 || persons == 0 || frames == 0) {
        throw ConfigError("num_classes, persons and frames must be positive");
    }
}

graph::SkeletonGraph LstaNetConfig::load_graph() const
{
    if (graph == "ntu-rgbd") return graph::SkeletonGraph::ntu_rgbd();
    if (graph == "stick-6") {
        // hip, neck, head, two hands, one foot
        return graph::SkeletonGraph(6, {{0, 1}, {1, 2}, {1, 3}, {1, 4}, {0, 5}});
    }
    std::ifstream in(graph);
    if (!in) throw ConfigError("cannot open graph edge list " + graph);
    return graph::SkeletonGraph::from_edge_list(in);
}

layers::MamOptions LstaNetConfig::mam_options() const
{
    return {.kernel = mam_kernel, .dilations = mam_dilations, .pooling = mam_pooling, .order = mam_order};
}

layers::BlockOptions LstaNetConfig::block_options() const
{
    layers::BlockOptions o;
    if (spatial_attention) o.msda.attention = mam_options();
    o.tpa.fragments = fragments;
    o.tpa.dilations = tpa_dilations;
    o.tpa.identity_first_fragment = identity_first_fragment;
    o.temporal_attention = temporal_attention ? std::optional(mam_options()) : std::nullopt;
    o.msda_residual = msda_residual;
    return o;
}

std::vector<std::pair<std::string, std::string>> LstaNetConfig::to_key_values() const
{
    return {
        {"graph", graph},
        {"in_channels", std::to_string(in_channels)},
        {"block_channels", join_sizes(block_channels)},
        {"block_strides", join_sizes(block_strides)},
        {"max_scale", std::to_string(max_scale)},
        {"fragments", std::to_string(fragments)},
        {"tpa_dilations", join_sizes(tpa_dilations)},
        {"identity_first_fragment", bool_text(identity_first_fragment)},
        {"mam_kernel", std::to_string(mam_kernel)},
        {"mam_dilations", join_sizes(mam_dilations)},
        {"mam_pooling", pooling_name(mam_pooling)},
        {"mam_order", order_name(mam_order)},
        {"temporal_attention", bool_text(temporal_attention)},
        {"spatial_attention", bool_text(spatial_attention)},
        {"spatial_scheme", graph::scheme_name(spatial_scheme)},
        {"with_masks", bool_text(with_masks)},
        {"msda_residual", bool_text(msda_residual)},
        {"num_classes", std::to_string(num_classes)},
        {"persons", std::to_string(persons)},
        {"frames", std::to_string(frames)},
    };
}

void LstaNetConfig::apply(ConfigFile& file)
{
    if (auto v = file.take("graph")) graph = *v;
    if (auto v = file.take("in_channels")) in_channels = parse_size("in_channels", *v);
    if (auto v = file.take("block_channels")) block_channels = parse_size_list("block_channels", *v);
    if (auto v = file.take("block_strides")) block_strides = parse_size_list("block_strides", *v);
    if (auto v = file.take("max_scale")) max_scale = parse_size("max_scale", *v);
    if (auto v = file.take("fragments")) fragments = parse_size("fragments", *v);
    if (auto v = file.take("tpa_dilations")) tpa_dilations = parse_size_list("tpa_dilations", *v);
    if (auto v = file.take("identity_first_fragment")) {
        identity_first_fragment = parse_bool("identity_first_fragment", *v);
    }
    if (auto v = file.take("mam_kernel")) mam_kernel = parse_size("mam_kernel", *v);
    if (auto v = file.take("mam_dilations")) mam_dilations = parse_size_list("mam_dilations", *v);
    if (auto v = file.take("mam_pooling")) mam_pooling = parse_pooling(*v);
    if (auto v = file.take("mam_order")) mam_order = parse_order(*v);
    if (auto v = file.take("temporal_attention")) temporal_attention = parse_bool("temporal_attention", *v);
    if (auto v = file.take("spatial_attention")) spatial_attention = parse_bool("spatial_attention", *v);
    if (auto v = file.take("spatial_scheme")) {
        try {
            spatial_scheme = graph::parse_scheme(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = file.take("with_masks")) with_masks = parse_bool("with_masks", *v);
    if (auto v = file.take("msda_residual")) msda_residual = parse_bool("msda_residual", *v);
    if (auto v = file.take("num_classes")) num_classes = parse_size("num_classes", *v);
    if (auto v = file.take("persons")) persons = parse_size("persons", *v);
    if (auto v = file.take("frames")) frames = parse_size("frames", *v);
}

std::string canonical_text(const LstaNetConfig& config)
{
    std::ostringstream os;
    for (const auto& [key, value] : config.to_key_values()) {
        if (key == "graph") continue;
        os << key << '=' << value << '\n';
    }
    const auto g = config.load_graph();
    os << "graph_vertices=" << g.vertex_count() << "\ngraph_edges=";
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (i) os << ',';
        os << g.edges()[i].first << '-' << g.edges()[i].second;
    }
    os << '\n';
    return os.str();
}

LstaNetConfig reduced_config(std::size_t num_classes, std::size_t frames)
{
    LstaNetConfig c;
    c.block_channels = {12, 24, 48};
    c.num_classes = num_classes;
    c.frames = frames;
    return c;
}

} // namespace lsta::model

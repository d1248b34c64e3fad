#pragma once

#include "lsta/graph/adjacency.hpp"
#include "lsta/layers/block.hpp"

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsta::model {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Flat "key = value" text; '#' starts a comment. Consumers take the keys
/// they understand so leftovers can be reported as unknown.
class ConfigFile {
public:
    ConfigFile() = default;
    static ConfigFile parse(std::istream& in);
    static ConfigFile load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> take(const std::string& key);
    std::vector<std::string> unused() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> taken_;
};

struct LstaNetConfig {
    /// "ntu-rgbd", "stick-6" (a 6-joint figure for small tests) or a path
    /// to an edge-list file.
    std::string graph = "ntu-rgbd";
    std::size_t in_channels = 3;
    std::vector<std::size_t> block_channels{72, 144, 288};
    std::vector<std::size_t> block_strides{1, 2, 2};
    std::size_t max_scale = 8;
    std::size_t fragments = 6;
    std::vector<std::size_t> tpa_dilations; ///< empty: d_s = s
    bool identity_first_fragment = false;
    std::size_t mam_kernel = 5;
    std::vector<std::size_t> mam_dilations{1, 2, 3};
    layers::Pooling mam_pooling = layers::Pooling::Max;
    layers::GateOrder mam_order = layers::GateOrder::MaxThenSigmoid;
    bool temporal_attention = true;
    bool spatial_attention = false;
    graph::Scheme spatial_scheme = graph::Scheme::Decentralized;
    bool with_masks = true;
    bool msda_residual = true;
    std::size_t num_classes = 60;
    std::size_t persons = 2;
    std::size_t frames = 300;

    /// Throws ConfigError when an invariant fails.
    void validate() const;

    graph::SkeletonGraph load_graph() const;
    layers::MamOptions mam_options() const;
    layers::BlockOptions block_options() const;

    /// Fields as key=value pairs in a fixed order, the inverse of apply().
    std::vector<std::pair<std::string, std::string>> to_key_values() const;
    /// Reads every model key present in `file`.
    void apply(ConfigFile& file);
};

/// Canonical description hashed into checkpoints: every field plus the
/// resolved graph edges, so a different edge file changes the digest.
std::string canonical_text(const LstaNetConfig& config);

/// The 12/24/48 network used for gradient checks and overfit runs.
LstaNetConfig reduced_config(std::size_t num_classes, std::size_t frames);

std::string pooling_name(layers::Pooling pooling);
layers::Pooling parse_pooling(const std::string& name);

// Shared value parsers, also used by other modules' configs.
std::size_t parse_size(const std::string& key, const std::string& text);
double parse_real(const std::string& key, const std::string& text);
bool parse_bool(const std::string& key, const std::string& text);
std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& text);
std::string join_sizes(const std::vector<std::size_t>& values);

} // namespace lsta::model

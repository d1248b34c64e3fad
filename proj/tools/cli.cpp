#include "cli.hpp"

#include "lsta/data/synthetic.hpp"
#include "lsta/engine/trainer.hpp"
#include "lsta/graph/adjacency.hpp"
#include "lsta/layers/gradient_suite.hpp"
#include "lsta/layers/probe.hpp"
#include "lsta/model/checkpoint.hpp"
#include "lsta/model/net_gradcheck.hpp"
#include "lsta/model/param_count.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

namespace lsta::cli {

namespace {

constexpr double gradient_tolerance = 1e-4;

std::string real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

struct Settings {
    model::LstaNetConfig net;
    engine::TrainConfig train;
};

Settings load_settings(const Common& common)
{
    Settings s;
    if (!common.config_path.empty()) {
        auto file = model::ConfigFile::load(common.config_path);
        s.net.apply(file);
        s.train.apply(file);
        const auto unused = file.unused();
        if (!unused.empty()) {
            std::string keys;
            for (const auto& k : unused) keys += (keys.empty() ? "" : ", ") + k;
            throw model::ConfigError(common.config_path + ": unknown keys " + keys);
        }
    }
    if (common.seed) s.train.seed = *common.seed;
    s.net.validate();
    return s;
}

/// Destination stream: a file when a path is given, otherwise `fallback`.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback)
    {
        if (path.empty()) {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot write " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

struct DataFlags {
    std::string manifest;
    std::size_t synthetic = 0;
    std::string stream = "joint";
    std::string bone_tree;
    bool permissive = false;

    void add_to(CLI::App& app)
    {
        auto* m = app.add_option("--manifest", manifest, "TSV manifest: path, label, sample_id");
        auto* s = app.add_option("--synthetic", synthetic, "use N synthetic sequences per class instead");
        m->excludes(s);
        app.add_option("--stream", stream, "joint, bone, joint-motion or bone-motion")
            ->check(CLI::IsMember({"joint", "bone", "motion", "joint-motion", "bone-motion"}));
        app.add_option("--bone-tree", bone_tree, "child-parent pairs (1-based) for the bone stream");
        app.add_flag("--permissive", permissive, "subsample sequences longer than the frame count");
    }

    data::BoneTree tree() const
    {
        return bone_tree.empty() ? data::BoneTree::ntu_rgbd() : data::BoneTree::load(bone_tree);
    }

    std::unique_ptr<data::Dataset> open(const model::LstaNetConfig& config) const
    {
        const auto s = data::parse_stream(stream);
        if (synthetic > 0) {
            data::SyntheticOptions opts{.classes = config.num_classes, .per_class = synthetic, .frames = config.frames};
            opts.joint_count = config.load_graph().vertex_count();
            return std::make_unique<data::InMemoryDataset>(
                data::synthetic_dataset(opts, s, config.persons, tree()));
        }
        if (manifest.empty()) throw CLI::RequiredError("--manifest or --synthetic");
        data::PreprocessOptions pre;
        pre.frames = config.frames;
        pre.persons = config.persons;
        pre.joint_count = config.load_graph().vertex_count();
        const auto t = tree();
        pre.center = t.center();
        pre.mode = permissive ? data::ReplayMode::Permissive : data::ReplayMode::Strict;
        return std::make_unique<data::ManifestDataset>(data::load_manifest(manifest), s, pre, t);
    }
};

model::LstaNet make_net(const Settings& s, const std::string& checkpoint)
{
    if (checkpoint.empty()) return model::LstaNet(s.net, s.train.seed);
    return model::load_checkpoint(checkpoint, s.net);
}

void write_matrix_rows(std::ostream& out, std::size_t k, const Eigen::MatrixXd& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << k << ',' << i;
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << real(m(i, j));
        out << '\n';
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"LSTA-Net skeleton action recognition", "lsta"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", common.seed, "seed for initialization, shuffling and probes");
    app.add_option("--threads", common.threads, "worker threads (execution is single-threaded)")
        ->check(CLI::PositiveNumber);

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "dump the multi-scale adjacency matrices as CSV");
    std::string graph_source;
    std::string scheme = "decentralized";
    std::optional<std::size_t> graph_k;
    bool normalized = false;
    std::string graph_out;
    graph_cmd->add_option("--graph", graph_source, "ntu-rgbd, stick-6 or an edge-list file");
    graph_cmd->add_option("--scheme", scheme, "power, disentangled or decentralized")
        ->check(CLI::IsMember({"power", "disentangled", "decentralized", "decentralized-indicator"}));
    graph_cmd->add_option("--k", graph_k, "largest scale (default: max_scale of the config)");
    graph_cmd->add_flag("--normalized", normalized, "apply symmetric normalization");
    graph_cmd->add_option("--out", graph_out, "CSV path (default stdout)");

    // params
    auto* params_cmd = app.add_subcommand("params", "print the parameter count per module");

    // preprocess
    auto* pre_cmd = app.add_subcommand("preprocess", "convert .skeleton captures into sample caches");
    std::string pre_input;
    std::string pre_out;
    DataFlags pre_data;
    pre_cmd->add_option("--input", pre_input, "a .skeleton file or a manifest")->required()->check(CLI::ExistingFile);
    pre_cmd->add_option("--out", pre_out, "cache file, or directory when the input is a manifest")->required();
    pre_cmd->add_option("--stream", pre_data.stream, "joint, bone, joint-motion or bone-motion")
        ->check(CLI::IsMember({"joint", "bone", "motion", "joint-motion", "bone-motion"}));
    pre_cmd->add_option("--bone-tree", pre_data.bone_tree, "child-parent pairs (1-based)");
    pre_cmd->add_flag("--permissive", pre_data.permissive, "subsample sequences longer than the frame count");

    // train
    auto* train_cmd = app.add_subcommand("train", "train on a manifest or a synthetic corpus");
    DataFlags train_data;
    train_data.add_to(*train_cmd);
    std::string train_out;
    std::string train_log;
    std::optional<std::size_t> epochs;
    std::optional<double> target;
    train_cmd->add_option("--out", train_out, "checkpoint of the best epoch")->required();
    train_cmd->add_option("--log", train_log, "metrics log, one JSON object per epoch (default stdout)");
    train_cmd->add_option("--epochs", epochs, "override train.epochs");
    train_cmd->add_option("--target-top1", target, "stop once training accuracy reaches this")
        ->check(CLI::Range(0.0, 1.0));

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "top-1/top-5 accuracy and softmax scores");
    DataFlags eval_data;
    eval_data.add_to(*eval_cmd);
    std::string eval_checkpoint;
    std::string eval_out;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval_out, "score CSV");

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "score-level fusion of several streams");
    std::vector<std::string> score_files;
    std::vector<double> weights;
    std::string fuse_manifest;
    std::string fuse_out;
    fuse_cmd->add_option("scores", score_files, "score CSV files")->required()->check(CLI::ExistingFile);
    fuse_cmd->add_option("--weights", weights, "one weight per file (default 1)")->delimiter(',');
    fuse_cmd->add_option("--manifest", fuse_manifest, "labels for accuracy")->check(CLI::ExistingFile);
    fuse_cmd->add_option("--out", fuse_out, "fused score CSV");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference checks of every layer");
    std::vector<std::string> grad_layers;
    std::size_t grad_configs = 20;
    bool grad_net = false;
    std::size_t grad_coordinates = 400;
    grad_cmd->add_option("--layers", grad_layers, "subset of msda,tpa,mam,atpa,block")
        ->delimiter(',')
        ->check(CLI::IsMember({"msda", "tpa", "mam", "atpa", "block"}));
    grad_cmd->add_option("--configs", grad_configs, "random configurations per layer");
    grad_cmd->add_flag("--net", grad_net, "also check the reduced network");
    grad_cmd->add_option("--coordinates", grad_coordinates, "coordinates sampled for the network check");

    // impulse
    auto* impulse_cmd = app.add_subcommand("impulse", "receptive field of each TPA fragment");
    std::size_t fragments = 6;
    std::vector<std::size_t> dilations;
    std::size_t impulse_frames = 0;
    bool identity_first = false;
    std::string impulse_out;
    impulse_cmd->add_option("--fragments", fragments, "fragment count S")->check(CLI::PositiveNumber);
    impulse_cmd->add_option("--dilations", dilations, "one dilation per fragment")->delimiter(',');
    impulse_cmd->add_option("--frames", impulse_frames, "probe length (default fits the widest fragment)");
    impulse_cmd->add_flag("--identity-first", identity_first, "pass the first fragment through unconvolved");
    impulse_cmd->add_option("--out", impulse_out, "per-frame response CSV");

    // attention
    auto* attention_cmd = app.add_subcommand("attention", "export MAM gate weights as CSV");
    DataFlags attention_data;
    attention_data.add_to(*attention_cmd);
    std::string attention_checkpoint;
    std::string attention_out;
    std::size_t attention_limit = 8;
    attention_cmd->add_option("--checkpoint", attention_checkpoint, "trained checkpoint (default: fresh weights)")
        ->check(CLI::ExistingFile);
    attention_cmd->add_option("--out", attention_out, "output directory")->required();
    attention_cmd->add_option("--samples", attention_limit, "number of samples to run")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 2;
    }

    try {
        if (common.threads > 1) err << "note: running single-threaded\n";
        const auto settings = load_settings(common);

        if (*graph_cmd) {
            auto config = settings.net;
            if (!graph_source.empty()) config.graph = graph_source;
            const auto g = config.load_graph();
            const auto k = graph_k.value_or(config.max_scale);
            const auto d = graph::bfs_distances(g);
            const auto s = graph::parse_scheme(scheme);
            Output o(graph_out, out);
            *o << "k,row";
            for (std::size_t j = 0; j < g.vertex_count(); ++j) *o << ",col_" << j;
            *o << '\n';
            for (std::size_t i = 0; i <= k; ++i) {
                auto m = graph::scale_matrix(g, d, static_cast<int>(i), s);
                if (normalized && s != graph::Scheme::AdjacencyPower) m = graph::normalize_sym(m);
                write_matrix_rows(*o, i, m);
            }
        } else if (*params_cmd) {
            model::LstaNet net(settings.net, settings.train.seed);
            const auto table = model::param_count(net);
            model::print_param_table(out, table);
            const auto formula = model::analytic::net(settings.net, net.vertex_count());
            out << "analytic total  " << formula.total << (formula.total == table.total ? "  (equal)" : "  (DIFFERS)")
                << '\n';
            const bool inside = table.total >= 900000 && table.total <= 1100000;
            out << "budget band [900000, 1100000]  " << (inside ? "inside" : "outside") << '\n';
            if (formula.total != table.total) return 1;
        } else if (*pre_cmd) {
            auto config = settings.net;
            const auto tree = pre_data.tree();
            data::PreprocessOptions pre;
            pre.frames = config.frames;
            pre.persons = config.persons;
            pre.joint_count = tree.vertex_count();
            pre.center = tree.center();
            pre.mode = pre_data.permissive ? data::ReplayMode::Permissive : data::ReplayMode::Strict;
            const auto stream = data::parse_stream(pre_data.stream);
            auto convert = [&](const std::string& path, const std::string& target, int label,
                               const std::string& id) {
                auto seq = data::load_skeleton_file(path, pre.joint_count);
                data::Sample sample{data::preprocess(seq, pre, stream, tree),
                                    label >= 0 ? label : seq.label.value_or(-1), id.empty() ? seq.sample_id : id};
                data::save_sample(target, sample, stream);
                return sample;
            };
            if (std::filesystem::path(pre_input).extension() == ".skeleton") {
                auto s = convert(pre_input, pre_out, -1, "");
                out << s.sample_id << " -> " << pre_out << " " << shape_string(s.data.shape()) << '\n';
            } else {
                std::filesystem::create_directories(pre_out);
                std::vector<data::ManifestEntry> cached;
                for (const auto& e : data::load_manifest(pre_input)) {
                    const auto name = e.sample_id + "." + data::stream_name(stream) + ".lsta";
                    convert(e.path, (std::filesystem::path(pre_out) / name).string(), e.label, e.sample_id);
                    cached.push_back({name, e.label, e.sample_id});
                }
                std::ofstream manifest(std::filesystem::path(pre_out) / "manifest.tsv");
                data::write_manifest(manifest, cached);
                out << cached.size() << " samples -> " << pre_out << '\n';
            }
        } else if (*train_cmd) {
            auto config = settings.train;
            if (epochs) config.epochs = *epochs;
            auto dataset = train_data.open(settings.net);
            model::LstaNet net(settings.net, config.seed);
            Output log(train_log, out);
            engine::TrainOptions options;
            options.config = config;
            options.target_top1 = target;
            options.metrics_log = &*log;
            options.checkpoint_path = train_out;
            auto result = engine::train(net, *dataset, options);
            const auto& best = result.history[result.best_epoch];
            err << "best epoch " << best.epoch << " top1 " << real(best.top1) << " loss " << real(best.loss)
                << " -> " << train_out << '\n';
        } else if (*eval_cmd) {
            auto dataset = eval_data.open(settings.net);
            auto net = make_net(settings, eval_checkpoint);
            auto result = engine::evaluate(net, *dataset, settings.train.batch_size);
            if (!eval_out.empty()) result.scores.save(eval_out);
            out << "top1 " << real(result.top1) << "\ntop5 " << real(result.top5) << '\n';
        } else if (*fuse_cmd) {
            std::vector<engine::ScoreFile> files;
            for (const auto& p : score_files) files.push_back(engine::ScoreFile::load(p));
            auto fused = engine::fuse_scores(files, weights);
            Output o(fuse_out, out);
            fused.write_csv(*o);
            if (!fuse_manifest.empty()) {
                std::map<std::string, int> labels;
                for (const auto& e : data::load_manifest(fuse_manifest)) labels[e.sample_id] = e.label;
                err << "top1 " << real(engine::top_k_accuracy(fused, labels, 1)) << "\ntop5 "
                    << real(engine::top_k_accuracy(fused, labels, 5)) << '\n';
            }
        } else if (*grad_cmd) {
            layers::GradientSuiteOptions options;
            options.configs = grad_configs;
            options.seed = common.seed.value_or(options.seed);
            double worst = 0.0;
            auto report = [&](const layers::GradientCase& c) {
                worst = std::max(worst, c.report.max_relative_error);
                out << c.layer << '\t' << real(c.report.max_relative_error) << '\t' << c.report.checks << '\t'
                    << c.config << '\n'
                    << std::flush;
            };
            options.on_case = report;
            layers::run_layer_gradient_suite(options, grad_layers);
            if (grad_net) report(model::reduced_net_gradcheck(options.seed, grad_coordinates));
            const bool pass = worst < gradient_tolerance;
            out << "max relative error " << real(worst) << (pass ? " PASS" : " FAIL") << '\n';
            if (!pass) return 1;
        } else if (*impulse_cmd) {
            layers::TpaOptions options{.fragments = fragments, .dilations = dilations,
                                       .identity_first_fragment = identity_first};
            std::size_t radius = 0;
            for (std::size_t s = 0; s < fragments; ++s) radius += dilations.empty() ? s + 1 : dilations.at(s);
            const auto frames = impulse_frames ? impulse_frames : 2 * radius + 9;
            const auto probe = layers::tpa_impulse_probe(options, frames, common.seed.value_or(1));
            out << "fragment,dilation,analytic_radius,measured_radius\n";
            for (std::size_t s = 0; s < probe.fragments.size(); ++s) {
                const auto& f = probe.fragments[s];
                out << s << ',' << f.dilation << ',' << f.analytic_radius << ',' << f.measured_radius << '\n';
            }
            if (!impulse_out.empty()) {
                Output o(impulse_out, out);
                *o << "frame";
                for (std::size_t s = 0; s < probe.fragments.size(); ++s) *o << ",fragment_" << s;
                *o << '\n';
                for (std::size_t t = 0; t < frames; ++t) {
                    *o << static_cast<long long>(t) - static_cast<long long>(probe.impulse_frame);
                    for (const auto& f : probe.fragments) *o << ',' << real(f.profile[t]);
                    *o << '\n';
                }
            }
            if (!probe.matches()) return 1;
        } else if (*attention_cmd) {
            auto dataset = attention_data.open(settings.net);
            auto net = make_net(settings, attention_checkpoint);
            std::vector<std::size_t> indices;
            for (std::size_t i = 0; i < std::min(attention_limit, dataset->size()); ++i) indices.push_back(i);
            auto batch = data::make_batch(*dataset, indices);
            {
                NoGradGuard no_grad;
                net.forward(batch.data, false);
            }
            std::filesystem::create_directories(attention_out);
            const auto persons = settings.net.persons;
            std::size_t written = 0;
            auto dump = [&](layers::MamLayer* mam, const std::string& name) {
                if (!mam) return;
                const auto& w = mam->last_attention();
                const auto channels = w.dim(1);
                std::ofstream f(std::filesystem::path(attention_out) / (name + ".csv"));
                f << "sample_id,person";
                for (std::size_t c = 0; c < channels; ++c) f << ",omega_" << c;
                f << '\n';
                for (std::size_t r = 0; r < w.dim(0); ++r) {
                    f << batch.sample_ids[r / persons] << ',' << r % persons;
                    for (std::size_t c = 0; c < channels; ++c) f << ',' << real(w[r * channels + c]);
                    f << '\n';
                }
                ++written;
            };
            for (std::size_t b = 0; b < net.block_count(); ++b) {
                auto& block = net.block(b);
                dump(block.msda().attention(), "block" + std::to_string(b) + "_msda");
                for (std::size_t i = 0; i < layers::LstaBlock::atpa_count; ++i) {
                    dump(block.atpa(i).attention(), "block" + std::to_string(b) + "_atpa" + std::to_string(i));
                }
            }
            out << written << " attention files -> " << attention_out << '\n';
        }
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace lsta::cli

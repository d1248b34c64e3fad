#include "lsta/data/synthetic.hpp"

#include "lsta/numerics/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace lsta::data {

std::vector<SkeletonSequence> synthetic_sequences(const SyntheticOptions& options)
{
    if (options.classes == 0 || options.per_class == 0 || options.frames == 0 || options.joint_count == 0) {
        throw std::invalid_argument("synthetic corpus needs classes, samples, frames and joints");
    }
    Rng rng(options.seed);
    const auto v = options.joint_count;
    std::vector<Joint> rest(v);
    for (auto& j : rest) j = {rng.uniform(-0.5, 0.5), rng.uniform(-0.8, 0.8), rng.uniform(2.5, 3.5)};

    std::vector<SkeletonSequence> out;
    for (std::size_t c = 0; c < options.classes; ++c) {
        const double frequency = static_cast<double>(c + 1) / static_cast<double>(options.frames);
        const std::size_t axis = c % 3;
        for (std::size_t s = 0; s < options.per_class; ++s) {
            Rng sample_rng(derive_seed(options.seed, c * 1000 + s + 1));
            const double phase = sample_rng.uniform(0.0, 0.5);
            SkeletonSequence seq;
            seq.label = static_cast<int>(c);
            char id[32];
            std::snprintf(id, sizeof id, "SYN%03zuA%03zu", s, c + 1);
            seq.sample_id = id;
            for (std::size_t t = 0; t < options.frames; ++t) {
                Body body;
                body.id = "72057594037931101";
                body.info = {"0", "1", "1", "1", "1", "0", "0", "0", "2"};
                body.joints = rest;
                const double swing =
                    options.amplitude * std::sin(2.0 * std::numbers::pi * (frequency * static_cast<double>(t) + phase));
                for (std::size_t j = 0; j < v; ++j) {
                    if (j % options.classes == c) body.joints[j][axis] += swing;
                    for (auto& coord : body.joints[j]) coord += options.noise * sample_rng.normal();
                }
                seq.frames.push_back(Frame{{std::move(body)}});
            }
            out.push_back(std::move(seq));
        }
    }
    return out;
}

InMemoryDataset synthetic_dataset(const SyntheticOptions& options, Stream stream, std::size_t persons,
                                  const BoneTree& tree)
{
    PreprocessOptions pre;
    pre.frames = options.frames;
    pre.persons = persons;
    pre.joint_count = options.joint_count;
    pre.center = tree.center();
    InMemoryDataset dataset;
    for (const auto& seq : synthetic_sequences(options)) {
        dataset.add(Sample{preprocess(seq, pre, stream, tree), *seq.label, seq.sample_id});
    }
    return dataset;
}

std::string write_synthetic_corpus(const std::string& dir, const SyntheticOptions& options)
{
    std::filesystem::create_directories(dir);
    std::vector<ManifestEntry> entries;
    for (const auto& seq : synthetic_sequences(options)) {
        const auto name = seq.sample_id + ".skeleton";
        std::ofstream out(std::filesystem::path(dir) / name);
        if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
        write_skeleton(out, seq);
        entries.push_back({name, *seq.label, seq.sample_id});
    }
    const auto manifest = (std::filesystem::path(dir) / "manifest.tsv").string();
    std::ofstream out(manifest);
    write_manifest(out, entries);
    return manifest;
}

} // namespace lsta::data

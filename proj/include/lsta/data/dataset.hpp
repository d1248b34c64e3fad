#pragma once

#include "lsta/data/preprocess.hpp"

#include <cstdint>
#include <istream>
#include <memory>
#include <string>
#include <vector>

namespace lsta::data {

struct Sample {
    Tensor data; ///< C x T x V x M
    int label = -1;
    std::string sample_id;
};

class Dataset {
public:
    virtual ~Dataset() = default;
    virtual std::size_t size() const = 0;
    virtual Sample get(std::size_t index) const = 0;
};

class InMemoryDataset : public Dataset {
public:
    InMemoryDataset() = default;
    explicit InMemoryDataset(std::vector<Sample> samples) : samples_(std::move(samples)) {}

    void add(Sample s) { samples_.push_back(std::move(s)); }
    std::size_t size() const override { return samples_.size(); }
    Sample get(std::size_t index) const override { return samples_.at(index); }

private:
    std::vector<Sample> samples_;
};

struct ManifestEntry {
    std::string path;
    int label = -1;
    std::string sample_id;
};

/// Tab-separated "path<TAB>label<TAB>sample_id" lines; relative paths are
/// resolved against `base_dir`. Blank lines and '#' lines are skipped.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir = "");
std::vector<ManifestEntry> load_manifest(const std::string& path);
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);

/// Reads raw .skeleton files (preprocessed on the fly) or cached archives
/// written by save_sample. Every path is checked up front; missing files
/// are reported together by sample id.
class ManifestDataset : public Dataset {
public:
    ManifestDataset(std::vector<ManifestEntry> entries, Stream stream, PreprocessOptions options, BoneTree tree);

    std::size_t size() const override { return entries_.size(); }
    Sample get(std::size_t index) const override;

private:
    std::vector<ManifestEntry> entries_;
    Stream stream_;
    PreprocessOptions options_;
    BoneTree tree_;
};

/// Cache file: the checkpoint container with entries "data", "label" and
/// "stream".
void save_sample(const std::string& path, const Sample& sample, Stream stream);
/// Loads a cached sample, deriving `stream` when the cache holds joints.
Sample load_sample(const std::string& path, Stream stream, const BoneTree& tree);

/// Shuffled batches of indices for one epoch; the order depends only on
/// (seed, epoch). The last batch may be partial.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch, bool shuffle = true);

struct Batch {
    Tensor data; ///< N x C x T x V x M
    std::vector<int> labels;
    std::vector<std::string> sample_ids;
};

Batch make_batch(const Dataset& dataset, const std::vector<std::size_t>& indices);

} // namespace lsta::data

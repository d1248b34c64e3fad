#include "lsta/data/dataset.hpp"

#include "lsta/model/checkpoint.hpp"
#include "lsta/numerics/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lsta::data {

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir)
{
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
        if (fields.size() != 3) {
            throw std::invalid_argument("manifest line " + std::to_string(number) +
                                        ": expected path, label and sample_id separated by tabs");
        }
        ManifestEntry e;
        std::filesystem::path p(fields[0]);
        e.path = (p.is_relative() && !base_dir.empty()) ? (std::filesystem::path(base_dir) / p).string() : fields[0];
        try {
            std::size_t used = 0;
            e.label = std::stoi(fields[1], &used);
            if (used != fields[1].size() || e.label < 0) throw std::invalid_argument("label");
        } catch (const std::exception&) {
            throw std::invalid_argument("manifest line " + std::to_string(number) + ": invalid label '" +
                                        fields[1] + "'");
        }
        e.sample_id = fields[2];
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ManifestEntry> load_manifest(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    return parse_manifest(in, std::filesystem::path(path).parent_path().string());
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries)
{
    for (const auto& e : entries) out << e.path << '\t' << e.label << '\t' << e.sample_id << '\n';
}

ManifestDataset::ManifestDataset(std::vector<ManifestEntry> entries, Stream stream, PreprocessOptions options,
                                 BoneTree tree)
    : entries_(std::move(entries)), stream_(stream), options_(options), tree_(std::move(tree))
{
    std::string missing;
    for (const auto& e : entries_) {
        if (!std::filesystem::exists(e.path)) missing += (missing.empty() ? "" : ", ") + e.sample_id;
    }
    if (!missing.empty()) throw std::runtime_error("missing sample files: " + missing);
}

Sample ManifestDataset::get(std::size_t index) const
{
    const auto& e = entries_.at(index);
    Sample s;
    if (std::filesystem::path(e.path).extension() == ".skeleton") {
        auto seq = load_skeleton_file(e.path, options_.joint_count);
        s.data = preprocess(seq, options_, stream_, tree_);
    } else {
        s = load_sample(e.path, stream_, tree_);
    }
    s.label = e.label;
    s.sample_id = e.sample_id;
    return s;
}

void save_sample(const std::string& path, const Sample& sample, Stream stream)
{
    model::TensorArchive archive;
    archive.digest = model::sha256("sample " + sample.sample_id);
    archive.entries.push_back({"data", sample.data.shape(), {sample.data.values().begin(), sample.data.values().end()}});
    archive.entries.push_back({"label", {1}, {static_cast<double>(sample.label)}});
    archive.entries.push_back({"stream", {1}, {static_cast<double>(static_cast<int>(stream))}});
    archive.write(path);
}

Sample load_sample(const std::string& path, Stream stream, const BoneTree& tree)
{
    const auto archive = model::TensorArchive::read(path);
    const auto& data = archive.at("data");
    const auto stored = static_cast<Stream>(static_cast<int>(archive.at("stream").values.at(0)));
    Sample s;
    s.data = Tensor(data.shape, data.values);
    s.label = static_cast<int>(archive.at("label").values.at(0));
    if (stored != stream) {
        if (stored != Stream::Joint) {
            throw std::runtime_error(path + " caches the " + stream_name(stored) + " stream; " +
                                     stream_name(stream) + " requested");
        }
        s.data = apply_stream(s.data, stream, tree);
    }
    return s;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch, bool shuffle)
{
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    if (shuffle) {
        Rng rng(derive_seed(seed, epoch));
        order = rng.permutation(count);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        batches.emplace_back(order.begin() + start, order.begin() + std::min(count, start + batch_size));
    }
    return batches;
}

Batch make_batch(const Dataset& dataset, const std::vector<std::size_t>& indices)
{
    if (indices.empty()) throw std::invalid_argument("empty batch");
    Batch batch;
    std::vector<double> values;
    Shape sample_shape;
    for (auto i : indices) {
        auto s = dataset.get(i);
        if (sample_shape.empty()) {
            sample_shape = s.data.shape();
        } else if (s.data.shape() != sample_shape) {
            throw ShapeError("sample " + s.sample_id + " has shape " + shape_string(s.data.shape()) +
                             ", batch has " + shape_string(sample_shape));
        }
        values.insert(values.end(), s.data.values().begin(), s.data.values().end());
        batch.labels.push_back(s.label);
        batch.sample_ids.push_back(s.sample_id);
    }
    // sample layout is C,T,V,M; the net takes N,C,T,V,M
    Shape shape{indices.size()};
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    batch.data = Tensor(std::move(shape), std::move(values));
    return batch;
}

} // namespace lsta::data

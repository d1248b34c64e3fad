#include "lsta/model/checkpoint.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace lsta::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char magic[4] = {'L', 'S', 'T', 'A'};

template <typename T>
void put(std::ostream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in, const std::string& path)
{
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) {
        throw CheckpointError(CheckpointError::Kind::Truncated, "truncated file: " + path);
    }
    return value;
}

void collect(ParameterStore& store, std::vector<ArchiveEntry>& entries)
{
    for (auto& [name, tensor] : store) {
        entries.push_back({name, tensor.shape(), {tensor.values().begin(), tensor.values().end()}});
    }
}

} // namespace

Digest sha256(const std::string& text)
{
    Digest digest{};
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1 ||
        length != digest.size()) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    return digest;
}

Digest config_digest(const LstaNetConfig& config) { return sha256(canonical_text(config)); }

std::string digest_hex(const Digest& digest)
{
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (auto b : digest) {
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

void TensorArchive::write(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot write " + path);
    out.write(magic, 4);
    put<std::uint16_t>(out, version);
    out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
        for (auto extent : e.shape) put<std::uint64_t>(out, extent);
        std::vector<float> narrow(e.values.begin(), e.values.end());
        out.write(reinterpret_cast<const char*>(narrow.data()), static_cast<std::streamsize>(narrow.size() * 4));
    }
    put<std::uint32_t>(out, metadata.epoch);
    put<std::uint64_t>(out, metadata.seed);
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "write failed: " + path);
}

TensorArchive TensorArchive::read(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path);
    char head[4];
    if (!in.read(head, 4) || std::memcmp(head, magic, 4) != 0) {
        throw CheckpointError(CheckpointError::Kind::Format, "not an LSTA archive (bad magic): " + path);
    }
    const auto file_version = get<std::uint16_t>(in, path);
    if (file_version != version) {
        throw CheckpointError(CheckpointError::Kind::Version,
                              "unsupported archive version " + std::to_string(file_version) + ": " + path);
    }
    TensorArchive archive;
    if (!in.read(reinterpret_cast<char*>(archive.digest.data()), archive.digest.size())) {
        throw CheckpointError(CheckpointError::Kind::Truncated, "truncated file: " + path);
    }
    const auto count = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < count; ++i) {
        ArchiveEntry e;
        const auto name_length = get<std::uint32_t>(in, path);
        if (name_length > 4096) throw CheckpointError(CheckpointError::Kind::Format, "corrupt entry name: " + path);
        e.name.resize(name_length);
        if (!in.read(e.name.data(), name_length)) {
            throw CheckpointError(CheckpointError::Kind::Truncated, "truncated file: " + path);
        }
        const auto rank = get<std::uint32_t>(in, path);
        if (rank > 8) throw CheckpointError(CheckpointError::Kind::Format, "corrupt rank for " + e.name);
        std::uint64_t elements = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            const auto extent = get<std::uint64_t>(in, path);
            if (extent == 0 || extent > (std::uint64_t{1} << 32)) {
                throw CheckpointError(CheckpointError::Kind::Format, "corrupt extent for " + e.name);
            }
            e.shape.push_back(extent);
            elements *= extent;
        }
        if (elements > (std::uint64_t{1} << 32)) {
            throw CheckpointError(CheckpointError::Kind::Format, "corrupt size for " + e.name);
        }
        std::vector<float> narrow(elements);
        if (!in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(elements * 4))) {
            throw CheckpointError(CheckpointError::Kind::Truncated, "truncated file: " + path);
        }
        e.values.assign(narrow.begin(), narrow.end());
        archive.entries.push_back(std::move(e));
    }
    archive.metadata.epoch = get<std::uint32_t>(in, path);
    archive.metadata.seed = get<std::uint64_t>(in, path);
    return archive;
}

const ArchiveEntry& TensorArchive::at(const std::string& name) const
{
    for (const auto& e : entries) {
        if (e.name == name) return e;
    }
    throw CheckpointError(CheckpointError::Kind::Mismatch, "archive has no entry " + name);
}

void save_checkpoint(LstaNet& net, const std::string& path, const TrainingMetadata& metadata)
{
    TensorArchive archive;
    archive.digest = config_digest(net.config());
    collect(net.parameters(), archive.entries);
    collect(net.buffers(), archive.entries);
    archive.metadata = metadata;
    archive.write(path);
}

void restore_checkpoint(LstaNet& net, const TensorArchive& archive)
{
    if (archive.digest != config_digest(net.config())) {
        throw CheckpointError(CheckpointError::Kind::Digest,
                              "checkpoint config digest " + digest_hex(archive.digest) +
                                  " does not match the configuration (" + digest_hex(config_digest(net.config())) +
                                  ")");
    }
    const std::size_t expected = net.parameters().size() + net.buffers().size();
    if (archive.entries.size() != expected) {
        throw CheckpointError(CheckpointError::Kind::Mismatch, "checkpoint holds " +
                                                                   std::to_string(archive.entries.size()) +
                                                                   " tensors, net expects " + std::to_string(expected));
    }
    std::size_t i = 0;
    for (auto* store : {&net.parameters(), &net.buffers()}) {
        for (auto& [name, tensor] : *store) {
            const auto& e = archive.entries[i++];
            if (e.name != name || e.shape != tensor.shape()) {
                throw CheckpointError(CheckpointError::Kind::Mismatch,
                                      "checkpoint entry " + e.name + shape_string(e.shape) + " does not match " +
                                          name + shape_string(tensor.shape()));
            }
            std::copy(e.values.begin(), e.values.end(), tensor.mutable_values().begin());
        }
    }
}

LstaNet load_checkpoint(const std::string& path, const LstaNetConfig& config, TrainingMetadata* metadata)
{
    const auto archive = TensorArchive::read(path);
    LstaNet net(config, 0);
    restore_checkpoint(net, archive);
    if (metadata) *metadata = archive.metadata;
    return net;
}

} // namespace lsta::model

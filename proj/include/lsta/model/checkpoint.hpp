#pragma once

#include "lsta/model/lsta_net.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsta::model {

class CheckpointError : public std::runtime_error {
public:
    enum class Kind { Io, Format, Version, Truncated, Digest, Mismatch };
    CheckpointError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const std::string& text);
Digest config_digest(const LstaNetConfig& config);
std::string digest_hex(const Digest& digest);

struct ArchiveEntry {
    std::string name;
    Shape shape;
    std::vector<double> values; ///< stored on disk as 32-bit floats
};

struct TrainingMetadata {
    std::uint32_t epoch = 0;
    std::uint64_t seed = 0;
};

/// The on-disk container: magic "LSTA", u16 version, 32-byte digest,
/// u32 entry count, then per entry u32 name length, name, u32 rank,
/// u64 extents and little-endian f32 values, followed by the metadata.
struct TensorArchive {
    static constexpr std::uint16_t version = 1;

    Digest digest{};
    std::vector<ArchiveEntry> entries;
    TrainingMetadata metadata;

    void write(const std::string& path) const;
    static TensorArchive read(const std::string& path);

    const ArchiveEntry& at(const std::string& name) const;
};

/// Parameters followed by batch-norm buffers.
void save_checkpoint(LstaNet& net, const std::string& path, const TrainingMetadata& metadata = {});
/// Rebuilds the net for `config` and restores every tensor. The stored
/// digest must match the config's.
LstaNet load_checkpoint(const std::string& path, const LstaNetConfig& config,
                        TrainingMetadata* metadata = nullptr);
/// Restores into an existing net.
void restore_checkpoint(LstaNet& net, const TensorArchive& archive);

} // namespace lsta::model

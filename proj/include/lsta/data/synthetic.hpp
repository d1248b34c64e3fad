#pragma once

#include "lsta/data/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lsta::data {

/// Labeled single-person sequences in which each class swings its own
/// group of joints at its own frequency around a shared rest pose.
struct SyntheticOptions {
    std::size_t classes = 4;
    std::size_t per_class = 4;
    std::size_t frames = 32;
    std::size_t joint_count = 25;
    double amplitude = 0.3;
    double noise = 0.02;
    std::uint64_t seed = 7;
};

std::vector<SkeletonSequence> synthetic_sequences(const SyntheticOptions& options);

/// The sequences run through `preprocess` with the same frame count.
InMemoryDataset synthetic_dataset(const SyntheticOptions& options, Stream stream = Stream::Joint,
                                  std::size_t persons = 2, const BoneTree& tree = BoneTree::ntu_rgbd());

/// Writes one .skeleton file per sequence plus manifest.tsv into `dir`;
/// returns the manifest path.
std::string write_synthetic_corpus(const std::string& dir, const SyntheticOptions& options);

} // namespace lsta::data

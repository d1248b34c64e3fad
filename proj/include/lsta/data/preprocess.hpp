#pragma once

#include "lsta/data/bone_tree.hpp"
#include "lsta/data/skeleton_file.hpp"
#include "lsta/numerics/tensor.hpp"

#include <string>
#include <vector>

// Samples are C x T x V x M tensors (coordinate, frame, joint, person).
namespace lsta::data {

enum class Stream { Joint, Bone, JointMotion, BoneMotion };

Stream parse_stream(const std::string& name);
std::string stream_name(Stream stream);

enum class ReplayMode {
    Strict,     ///< longer sequences are an error
    Permissive, ///< longer sequences are subsampled at floor(i * L / T)
};

/// Source frame for each of the T output frames of a length-L sequence:
/// cyclic tiling when L <= T.
std::vector<std::size_t> replay_indices(std::size_t length, std::size_t frames, ReplayMode mode);

SkeletonSequence pad_replay(const SkeletonSequence& seq, std::size_t frames, ReplayMode mode = ReplayMode::Strict);
Tensor pad_replay(const Tensor& sample, std::size_t frames, ReplayMode mode = ReplayMode::Strict);

/// Body ids ordered by total motion energy (sum of squared frame-to-frame
/// joint displacement), largest first.
std::vector<std::string> rank_bodies(const SkeletonSequence& seq);

/// Places the `persons` most active bodies into the M slots; missing
/// bodies and frames are zero.
Tensor to_tensor(const SkeletonSequence& seq, std::size_t persons = 2);

/// A body-frame whose coordinates are all zero counts as absent.
bool body_present(const Tensor& sample, std::size_t frame, std::size_t person);

/// Subtracts the center joint of the primary body's first present frame
/// from every present body-frame.
Tensor translate_center(const Tensor& sample, std::size_t center = 20);

Tensor to_bone(const Tensor& sample, const BoneTree& tree);
/// x[t+1] - x[t]; the final frame is zero.
Tensor to_motion(const Tensor& sample);

Tensor apply_stream(const Tensor& joints, Stream stream, const BoneTree& tree);

struct PreprocessOptions {
    std::size_t frames = 300;
    std::size_t persons = 2;
    std::size_t joint_count = 25;
    std::size_t center = 20;
    ReplayMode mode = ReplayMode::Strict;
};

/// Body selection, translation, replay padding, then the stream transform.
Tensor preprocess(const SkeletonSequence& seq, const PreprocessOptions& options, Stream stream,
                  const BoneTree& tree);

} // namespace lsta::data

#include "lsta/data/preprocess.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lsta::data {

namespace {

struct Dims {
    std::size_t c, t, v, m;
    explicit Dims(const Tensor& x)
    {
        if (x.rank() != 4) throw ShapeError("expected a C x T x V x M sample, got " + shape_string(x.shape()));
        c = x.dim(0), t = x.dim(1), v = x.dim(2), m = x.dim(3);
    }
    std::size_t at(std::size_t ci, std::size_t ti, std::size_t vi, std::size_t mi) const
    {
        return ((ci * t + ti) * v + vi) * m + mi;
    }
};

} // namespace

Stream parse_stream(const std::string& name)
{
    if (name == "joint") return Stream::Joint;
    if (name == "bone") return Stream::Bone;
    if (name == "joint-motion" || name == "motion") return Stream::JointMotion;
    if (name == "bone-motion") return Stream::BoneMotion;
    throw std::invalid_argument("unknown stream '" + name + "' (joint, bone, joint-motion, bone-motion)");
}

std::string stream_name(Stream stream)
{
    switch (stream) {
    case Stream::Joint: return "joint";
    case Stream::Bone: return "bone";
    case Stream::JointMotion: return "joint-motion";
    case Stream::BoneMotion: return "bone-motion";
    }
    return "?";
}

std::vector<std::size_t> replay_indices(std::size_t length, std::size_t frames, ReplayMode mode)
{
    if (length == 0) throw std::invalid_argument("cannot replay an empty sequence");
    if (frames == 0) throw std::invalid_argument("target frame count must be positive");
    std::vector<std::size_t> idx(frames);
    if (length <= frames) {
        for (std::size_t i = 0; i < frames; ++i) idx[i] = i % length;
        return idx;
    }
    if (mode == ReplayMode::Strict) {
        throw std::invalid_argument("sequence has " + std::to_string(length) + " frames, more than the target " +
                                    std::to_string(frames));
    }
    for (std::size_t i = 0; i < frames; ++i) idx[i] = i * length / frames;
    return idx;
}

SkeletonSequence pad_replay(const SkeletonSequence& seq, std::size_t frames, ReplayMode mode)
{
    SkeletonSequence out;
    out.label = seq.label;
    out.sample_id = seq.sample_id;
    for (auto i : replay_indices(seq.frames.size(), frames, mode)) out.frames.push_back(seq.frames[i]);
    return out;
}

Tensor pad_replay(const Tensor& sample, std::size_t frames, ReplayMode mode)
{
    const Dims d(sample);
    const auto idx = replay_indices(d.t, frames, mode);
    const std::size_t block = d.v * d.m;
    std::vector<double> out(d.c * frames * block);
    const auto in = sample.values();
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t t = 0; t < frames; ++t) {
            std::copy_n(in.begin() + (c * d.t + idx[t]) * block, block, out.begin() + (c * frames + t) * block);
        }
    }
    return Tensor({d.c, frames, d.v, d.m}, std::move(out));
}

std::vector<std::string> rank_bodies(const SkeletonSequence& seq)
{
    struct Track {
        std::size_t first_seen;
        double energy = 0.0;
        const Body* previous = nullptr;
        std::size_t previous_frame = 0;
    };
    std::map<std::string, Track> tracks;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        for (const auto& body : seq.frames[t].bodies) {
            auto [it, inserted] = tracks.try_emplace(body.id, Track{tracks.size()});
            auto& track = it->second;
            if (track.previous && track.previous_frame + 1 == t) {
                for (std::size_t j = 0; j < body.joints.size(); ++j) {
                    for (int k = 0; k < 3; ++k) {
                        const double diff = body.joints[j][k] - track.previous->joints[j][k];
                        track.energy += diff * diff;
                    }
                }
            }
            track.previous = &body;
            track.previous_frame = t;
        }
    }
    std::vector<std::pair<std::string, Track>> ordered(tracks.begin(), tracks.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second.energy != b.second.energy) return a.second.energy > b.second.energy;
        return a.second.first_seen < b.second.first_seen;
    });
    std::vector<std::string> ids;
    for (const auto& [id, track] : ordered) ids.push_back(id);
    return ids;
}

Tensor to_tensor(const SkeletonSequence& seq, std::size_t persons)
{
    if (seq.frames.empty()) throw std::invalid_argument("sequence " + seq.sample_id + " has no frames");
    std::size_t v = 0;
    for (const auto& frame : seq.frames) {
        for (const auto& body : frame.bodies) v = std::max(v, body.joints.size());
    }
    if (v == 0) throw std::invalid_argument("sequence " + seq.sample_id + " has no bodies");
    auto ranked = rank_bodies(seq);
    ranked.resize(std::min(ranked.size(), persons));

    const std::size_t t = seq.frames.size();
    std::vector<double> out(3 * t * v * persons, 0.0);
    for (std::size_t ti = 0; ti < t; ++ti) {
        for (const auto& body : seq.frames[ti].bodies) {
            const auto slot = std::find(ranked.begin(), ranked.end(), body.id);
            if (slot == ranked.end()) continue;
            const std::size_t m = static_cast<std::size_t>(slot - ranked.begin());
            for (std::size_t j = 0; j < body.joints.size(); ++j) {
                for (std::size_t c = 0; c < 3; ++c) out[((c * t + ti) * v + j) * persons + m] = body.joints[j][c];
            }
        }
    }
    return Tensor({3, t, v, persons}, std::move(out));
}

bool body_present(const Tensor& sample, std::size_t frame, std::size_t person)
{
    const Dims d(sample);
    const auto x = sample.values();
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t v = 0; v < d.v; ++v) {
            if (x[d.at(c, frame, v, person)] != 0.0) return true;
        }
    }
    return false;
}

Tensor translate_center(const Tensor& sample, std::size_t center)
{
    const Dims d(sample);
    if (center >= d.v) throw std::invalid_argument("center joint outside the joint range");
    std::size_t first = d.t;
    for (std::size_t t = 0; t < d.t && first == d.t; ++t) {
        if (body_present(sample, t, 0)) first = t;
    }
    if (first == d.t) throw std::invalid_argument("no frame with a present primary body");
    std::vector<double> x(sample.values().begin(), sample.values().end());
    std::vector<double> origin(d.c);
    for (std::size_t c = 0; c < d.c; ++c) origin[c] = x[d.at(c, first, center, 0)];
    for (std::size_t t = 0; t < d.t; ++t) {
        for (std::size_t m = 0; m < d.m; ++m) {
            if (!body_present(sample, t, m)) continue;
            for (std::size_t c = 0; c < d.c; ++c) {
                for (std::size_t v = 0; v < d.v; ++v) x[d.at(c, t, v, m)] -= origin[c];
            }
        }
    }
    return Tensor(sample.shape(), std::move(x));
}

Tensor to_bone(const Tensor& sample, const BoneTree& tree)
{
    const Dims d(sample);
    if (tree.vertex_count() != d.v) {
        throw std::invalid_argument("bone tree has " + std::to_string(tree.vertex_count()) + " joints, sample has " +
                                    std::to_string(d.v));
    }
    const auto x = sample.values();
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t t = 0; t < d.t; ++t) {
            for (std::size_t v = 0; v < d.v; ++v) {
                if (v == tree.center()) continue;
                const std::size_t p = tree.parent(v);
                for (std::size_t m = 0; m < d.m; ++m) out[d.at(c, t, v, m)] = x[d.at(c, t, v, m)] - x[d.at(c, t, p, m)];
            }
        }
    }
    return Tensor(sample.shape(), std::move(out));
}

Tensor to_motion(const Tensor& sample)
{
    const Dims d(sample);
    if (d.t < 2) throw std::invalid_argument("motion needs at least two frames");
    const auto x = sample.values();
    const std::size_t block = d.v * d.m;
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t t = 0; t + 1 < d.t; ++t) {
            for (std::size_t i = 0; i < block; ++i) {
                out[(c * d.t + t) * block + i] = x[(c * d.t + t + 1) * block + i] - x[(c * d.t + t) * block + i];
            }
        }
    }
    return Tensor(sample.shape(), std::move(out));
}

Tensor apply_stream(const Tensor& joints, Stream stream, const BoneTree& tree)
{
    switch (stream) {
    case Stream::Joint: return joints;
    case Stream::Bone: return to_bone(joints, tree);
    case Stream::JointMotion: return to_motion(joints);
    case Stream::BoneMotion: return to_motion(to_bone(joints, tree));
    }
    return joints;
}

Tensor preprocess(const SkeletonSequence& seq, const PreprocessOptions& options, Stream stream,
                  const BoneTree& tree)
{
    Tensor joints = to_tensor(seq, options.persons);
    if (joints.dim(2) != options.joint_count) {
        throw std::invalid_argument("sequence " + seq.sample_id + " has " + std::to_string(joints.dim(2)) +
                                    " joints, expected " + std::to_string(options.joint_count));
    }
    joints = translate_center(joints, options.center);
    joints = pad_replay(joints, options.frames, options.mode);
    return apply_stream(joints, stream, tree);
}

} // namespace lsta::data

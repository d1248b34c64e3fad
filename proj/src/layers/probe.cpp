#include "lsta/layers/probe.hpp"

#include <cmath>
#include <stdexcept>

namespace lsta::layers {

bool ImpulseProbe::matches() const
{
    for (const auto& f : fragments) {
        if (f.measured_radius != f.analytic_radius) return false;
    }
    return !fragments.empty();
}

ImpulseProbe tpa_impulse_probe(TpaOptions options, std::size_t frames, std::uint64_t seed)
{
    options.batch_norm = false;
    options.activation = false;
    Rng rng(seed);
    const auto s = options.fragments;
    TpaLayer layer(s, 2 * s, 1, options, rng);
    const auto widest = layer.receptive_radius(s - 1);
    if (frames < 2 * widest + 1) {
        throw std::invalid_argument("impulse probe needs at least " + std::to_string(2 * widest + 1) + " frames");
    }
    for (std::size_t f = 0; f < s; ++f) {
        for (auto& w : layer.embed_weight(f).mutable_values()) w = std::abs(w) + 0.1;
        if (f > 0 || !options.identity_first_fragment) {
            for (auto& w : layer.conv_weight(f).mutable_values()) w = std::abs(w) + 0.1;
        }
    }
    ImpulseProbe probe;
    probe.frames = frames;
    probe.impulse_frame = frames / 2;
    auto x = Tensor::zeros({1, s, frames, 1});
    for (std::size_t c = 0; c < s; ++c) x.mutable_values()[c * frames + probe.impulse_frame] = 1.0;
    NoGradGuard no_grad;
    const auto outputs = layer.fragment_outputs(x, false);
    for (std::size_t f = 0; f < s; ++f) {
        ImpulseFragment frag;
        frag.dilation = layer.dilation(f);
        frag.analytic_radius = layer.receptive_radius(f);
        frag.profile.assign(frames, 0.0);
        const auto& y = outputs[f];
        const auto c = y.dim(1);
        for (std::size_t ci = 0; ci < c; ++ci) {
            for (std::size_t t = 0; t < frames; ++t) frag.profile[t] += std::abs(y[ci * frames + t]);
        }
        for (std::size_t t = 0; t < frames; ++t) {
            if (frag.profile[t] != 0.0) {
                const auto d = t > probe.impulse_frame ? t - probe.impulse_frame : probe.impulse_frame - t;
                frag.measured_radius = std::max(frag.measured_radius, d);
            }
        }
        probe.fragments.push_back(std::move(frag));
    }
    return probe;
}

double tpa_telescoping_error(std::size_t fragments, std::size_t frames)
{
    Rng rng(1);
    TpaOptions options{.fragments = fragments, .batch_norm = false, .activation = false};
    TpaLayer layer(fragments, fragments, 1, options, rng);
    for (std::size_t f = 0; f < fragments; ++f) {
        auto e = layer.embed_weight(f).mutable_values();
        std::fill(e.begin(), e.end(), 0.0);
        e[f] = 1.0;
        auto k = layer.conv_weight(f).mutable_values();
        std::fill(k.begin(), k.end(), 0.0);
        k[options.kernel / 2] = 1.0;
    }
    NoGradGuard no_grad;
    const auto outputs = layer.fragment_outputs(Tensor::full({1, fragments, frames, 2}, 1.0), false);
    double worst = 0.0;
    for (std::size_t f = 0; f < fragments; ++f) {
        for (double v : outputs[f].values()) worst = std::max(worst, std::abs(v - static_cast<double>(f + 1)));
    }
    return worst;
}

} // namespace lsta::layers

#include "lsta/numerics/batch_norm.hpp"

#include "lsta/numerics/optimizer.hpp"

#include <cmath>

namespace lsta {

namespace ops {

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, double momentum, double eps, bool training)
{
    if (x.rank() < 2) throw ShapeError("batch_norm: rank must be >= 2");
    const std::size_t batch = x.dim(0), channels = x.dim(1);
    const std::size_t inner = x.size() / (batch * channels);
    for (const Tensor* t : std::initializer_list<const Tensor*>{&gamma, &beta, &running_mean, &running_var}) {
        if (t->size() != channels) {
            throw ShapeError("batch_norm: per-channel tensor does not match " + std::to_string(channels) +
                             " channels");
        }
    }
    const double count = static_cast<double>(batch * inner);
    auto xv = x.values();
    std::vector<double> mean(channels, 0.0), inv_std(channels, 0.0);

    if (training) {
        std::vector<double> var(channels, 0.0);
        for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t c = 0; c < channels; ++c) {
                const double* p = xv.data() + (n * channels + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) mean[c] += p[i];
            }
        }
        for (auto& m : mean) m /= count;
        for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t c = 0; c < channels; ++c) {
                const double* p = xv.data() + (n * channels + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) var[c] += (p[i] - mean[c]) * (p[i] - mean[c]);
            }
        }
        for (auto& v : var) v /= count;
        auto rm = running_mean.mutable_values();
        auto rv = running_var.mutable_values();
        const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
        for (std::size_t c = 0; c < channels; ++c) {
            inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
            // Persistent state is held at 32-bit precision.
            rm[c] = static_cast<float>((1.0 - momentum) * rm[c] + momentum * mean[c]);
            rv[c] = static_cast<float>((1.0 - momentum) * rv[c] + momentum * var[c] * unbias);
        }
    } else {
        auto rm = running_mean.values();
        auto rv = running_var.values();
        for (std::size_t c = 0; c < channels; ++c) {
            mean[c] = rm[c];
            inv_std[c] = 1.0 / std::sqrt(rv[c] + eps);
        }
    }

    auto gv = gamma.values();
    auto bv = beta.values();
    std::vector<double> out(x.size());
    std::vector<double> xhat(x.size());
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t off = (n * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                xhat[off + i] = (xv[off + i] - mean[c]) * inv_std[c];
                out[off + i] = gv[c] * xhat[off + i] + bv[c];
            }
        }
    }

    return make_op_result(
        "batch_norm", x.shape(), std::move(out), {x, gamma, beta},
        [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::Node& self) {
            const auto& gv = self.parents[1]->value;
            std::vector<double> dgamma(channels, 0.0), dbeta(channels, 0.0);
            for (std::size_t n = 0; n < batch; ++n) {
                for (std::size_t c = 0; c < channels; ++c) {
                    const std::size_t off = (n * channels + c) * inner;
                    for (std::size_t i = 0; i < inner; ++i) {
                        dgamma[c] += self.grad[off + i] * xhat[off + i];
                        dbeta[c] += self.grad[off + i];
                    }
                }
            }
            if (self.parents[0]->requires_grad) {
                auto& dx = self.parents[0]->ensure_grad();
                for (std::size_t n = 0; n < batch; ++n) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        const std::size_t off = (n * channels + c) * inner;
                        const double scale = gv[c] * inv_std[c];
                        for (std::size_t i = 0; i < inner; ++i) {
                            if (training) {
                                dx[off + i] += scale / count *
                                               (count * self.grad[off + i] - dbeta[c] - xhat[off + i] * dgamma[c]);
                            } else {
                                dx[off + i] += scale * self.grad[off + i];
                            }
                        }
                    }
                }
            }
            if (self.parents[1]->requires_grad) {
                auto& g = self.parents[1]->ensure_grad();
                for (std::size_t c = 0; c < channels; ++c) g[c] += dgamma[c];
            }
            if (self.parents[2]->requires_grad) {
                auto& g = self.parents[2]->ensure_grad();
                for (std::size_t c = 0; c < channels; ++c) g[c] += dbeta[c];
            }
        });
}

} // namespace ops

BatchNorm::BatchNorm(std::size_t channels)
    : gamma_(Tensor::full({channels}, 1.0, true)),
      beta_(Tensor::zeros({channels}, true)),
      running_mean_(Tensor::zeros({channels})),
      running_var_(Tensor::full({channels}, 1.0))
{
}

Tensor BatchNorm::forward(const Tensor& x, bool training)
{
    return ops::batch_norm(x, gamma_, beta_, running_mean_, running_var_, default_momentum, default_eps,
                           training);
}

void BatchNorm::register_parameters(ParameterStore& params, const std::string& prefix) const
{
    params.add(prefix + ".weight", gamma_);
    params.add(prefix + ".bias", beta_);
}

void BatchNorm::register_buffers(ParameterStore& buffers, const std::string& prefix) const
{
    buffers.add(prefix + ".running_mean", running_mean_);
    buffers.add(prefix + ".running_var", running_var_);
}

} // namespace lsta

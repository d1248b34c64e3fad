#include "lsta/numerics/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsta::ops {

namespace {

using detail::Node;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

bool wants(const Node& n, std::size_t i) { return n.parents[i]->requires_grad; }
std::vector<double>& parent_grad(Node& n, std::size_t i) { return n.parents[i]->ensure_grad(); }
const std::vector<double>& parent_value(const Node& n, std::size_t i) { return n.parents[i]->value; }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

void require_rank(const char* op, const Tensor& x, std::size_t rank)
{
    if (x.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
    }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace

Tensor add(const Tensor& a, const Tensor& b)
{
    require_same_shape("add", a, b);
    std::vector<double> out(a.size());
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    return make_op_result("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
        for (std::size_t p = 0; p < 2; ++p) {
            if (!wants(self, p)) continue;
            auto& g = parent_grad(self, p);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor add_n(std::span<const Tensor> terms)
{
    if (terms.empty()) throw ShapeError("add_n: no terms");
    for (const auto& t : terms) require_same_shape("add_n", terms[0], t);
    std::vector<double> out(terms[0].size(), 0.0);
    for (const auto& t : terms) {
        auto v = t.values();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    }
    return make_op_result("add_n", terms[0].shape(), std::move(out),
                          std::vector<Tensor>(terms.begin(), terms.end()), [](Node& self) {
                              for (std::size_t p = 0; p < self.parents.size(); ++p) {
                                  if (!wants(self, p)) continue;
                                  auto& g = parent_grad(self, p);
                                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                              }
                          });
}

Tensor mul(const Tensor& a, const Tensor& b)
{
    require_same_shape("mul", a, b);
    std::vector<double> out(a.size());
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return make_op_result("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
        const auto& av = parent_value(self, 0);
        const auto& bv = parent_value(self, 1);
        if (wants(self, 0)) {
            auto& g = parent_grad(self, 0);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
        }
        if (wants(self, 1)) {
            auto& g = parent_grad(self, 1);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
        }
    });
}

Tensor maximum(const Tensor& a, const Tensor& b)
{
    require_same_shape("maximum", a, b);
    std::vector<double> out(a.size());
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], bv[i]);
    // Ties route the gradient to the first argument.
    return make_op_result("maximum", a.shape(), std::move(out), {a, b}, [](Node& self) {
        const auto& av = parent_value(self, 0);
        const auto& bv = parent_value(self, 1);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            std::size_t p = av[i] >= bv[i] ? 0 : 1;
            if (wants(self, p)) parent_grad(self, p)[i] += self.grad[i];
        }
    });
}

Tensor scale(const Tensor& x, double factor)
{
    std::vector<double> out(x.values().begin(), x.values().end());
    for (auto& v : out) v *= factor;
    return make_op_result("scale", x.shape(), std::move(out), {x}, [factor](Node& self) {
        auto& g = parent_grad(self, 0);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
}

Tensor relu(const Tensor& x)
{
    std::vector<double> out(x.values().begin(), x.values().end());
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
    return make_op_result("relu", x.shape(), std::move(out), {x}, [](Node& self) {
        const auto& xv = parent_value(self, 0);
        auto& g = parent_grad(self, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (xv[i] > 0.0) g[i] += self.grad[i];
        }
    });
}

Tensor sigmoid(const Tensor& x)
{
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
    return make_op_result("sigmoid", x.shape(), std::move(out), {x}, [](Node& self) {
        auto& g = parent_grad(self, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double s = self.value[i];
            g[i] += self.grad[i] * s * (1.0 - s);
        }
    });
}

Tensor sum(const Tensor& x)
{
    auto xv = x.values();
    double total = std::accumulate(xv.begin(), xv.end(), 0.0);
    return make_op_result("sum", {1}, {total}, {x}, [](Node& self) {
        auto& g = parent_grad(self, 0);
        for (auto& v : g) v += self.grad[0];
    });
}

Tensor weighted_sum(const Tensor& x, std::span<const double> weights)
{
    if (weights.size() != x.size()) throw ShapeError("weighted_sum: weight count mismatch");
    auto xv = x.values();
    double total = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * weights[i];
    std::vector<double> w(weights.begin(), weights.end());
    return make_op_result("weighted_sum", {1}, {total}, {x}, [w = std::move(w)](Node& self) {
        auto& g = parent_grad(self, 0);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * w[i];
    });
}

Tensor reshape(const Tensor& x, Shape shape)
{
    if (shape_size(shape) != x.size()) {
        throw ShapeError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    return make_op_result("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
        auto& g = parent_grad(self, 0);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

Tensor permute(const Tensor& x, std::span<const std::size_t> axes)
{
    const auto& in_shape = x.shape();
    const std::size_t rank = in_shape.size();
    if (axes.size() != rank) throw ShapeError("permute: axis count mismatch");
    std::vector<bool> seen(rank, false);
    for (auto a : axes) {
        if (a >= rank || seen[a]) throw ShapeError("permute: invalid axis permutation");
        seen[a] = true;
    }
    std::vector<std::size_t> in_strides(rank, 1);
    for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
    Shape out_shape(rank);
    std::vector<std::size_t> gather_strides(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        out_shape[i] = in_shape[axes[i]];
        gather_strides[i] = in_strides[axes[i]];
    }
    // Source offset of every output element, in output order.
    std::vector<std::size_t> source(x.size());
    std::vector<std::size_t> idx(rank, 0);
    for (std::size_t o = 0; o < source.size(); ++o) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < rank; ++i) off += idx[i] * gather_strides[i];
        source[o] = off;
        for (std::size_t i = rank; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    auto xv = x.values();
    std::vector<double> out(source.size());
    for (std::size_t o = 0; o < out.size(); ++o) out[o] = xv[source[o]];
    return make_op_result("permute", std::move(out_shape), std::move(out), {x},
                          [source = std::move(source)](Node& self) {
                              auto& g = parent_grad(self, 0);
                              for (std::size_t o = 0; o < source.size(); ++o) g[source[o]] += self.grad[o];
                          });
}

Tensor concat_channels(std::span<const Tensor> parts)
{
    if (parts.empty()) throw ShapeError("concat_channels: no inputs");
    Shape out_shape = parts[0].shape();
    if (out_shape.size() < 2) throw ShapeError("concat_channels: rank must be >= 2");
    std::size_t channels = 0;
    for (const auto& p : parts) {
        const auto& s = p.shape();
        if (s.size() != out_shape.size()) throw ShapeError("concat_channels: rank mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i != 1 && s[i] != out_shape[i]) {
                throw ShapeError("concat_channels: extent mismatch " + shape_string(s) + " vs " +
                                 shape_string(out_shape));
            }
        }
        channels += s[1];
    }
    out_shape[1] = channels;
    const std::size_t batch = out_shape[0];
    const std::size_t inner = shape_size(out_shape) / (batch * channels);
    std::vector<double> out(shape_size(out_shape));
    std::vector<std::size_t> offsets;
    std::size_t c0 = 0;
    for (const auto& p : parts) {
        offsets.push_back(c0);
        const std::size_t pc = p.dim(1);
        auto pv = p.values();
        for (std::size_t n = 0; n < batch; ++n) {
            std::copy_n(pv.begin() + n * pc * inner, pc * inner,
                        out.begin() + (n * channels + c0) * inner);
        }
        c0 += pc;
    }
    return make_op_result(
        "concat_channels", out_shape, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
        [offsets = std::move(offsets), batch, channels, inner](Node& self) {
            for (std::size_t p = 0; p < self.parents.size(); ++p) {
                if (!wants(self, p)) continue;
                auto& g = parent_grad(self, p);
                const std::size_t pc = self.parents[p]->shape[1];
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* src = self.grad.data() + (n * channels + offsets[p]) * inner;
                    double* dst = g.data() + n * pc * inner;
                    for (std::size_t i = 0; i < pc * inner; ++i) dst[i] += src[i];
                }
            }
        });
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end)
{
    if (x.rank() < 2) throw ShapeError("slice_channels: rank must be >= 2");
    const std::size_t channels = x.dim(1);
    if (begin >= end || end > channels) throw ShapeError("slice_channels: invalid range");
    Shape out_shape = x.shape();
    out_shape[1] = end - begin;
    const std::size_t batch = out_shape[0];
    const std::size_t inner = x.size() / (batch * channels);
    const std::size_t width = end - begin;
    std::vector<double> out(shape_size(out_shape));
    auto xv = x.values();
    for (std::size_t n = 0; n < batch; ++n) {
        std::copy_n(xv.begin() + (n * channels + begin) * inner, width * inner,
                    out.begin() + n * width * inner);
    }
    return make_op_result("slice_channels", std::move(out_shape), std::move(out), {x},
                          [=](Node& self) {
                              auto& g = parent_grad(self, 0);
                              for (std::size_t n = 0; n < batch; ++n) {
                                  const double* src = self.grad.data() + n * width * inner;
                                  double* dst = g.data() + (n * channels + begin) * inner;
                                  for (std::size_t i = 0; i < width * inner; ++i) dst[i] += src[i];
                              }
                          });
}

Tensor temporal_dilated_conv(const Tensor& x, const Tensor& weight, std::size_t dilation,
                             std::size_t stride)
{
    require_rank("temporal_dilated_conv", x, 4);
    require_rank("temporal_dilated_conv weight", weight, 3);
    if (dilation < 1 || stride < 1) throw ShapeError("temporal_dilated_conv: dilation and stride must be >= 1");
    const std::size_t taps = weight.dim(2);
    if (taps % 2 == 0) throw ShapeError("temporal_dilated_conv: kernel size must be odd");
    const std::size_t n_batch = x.dim(0), c_in = x.dim(1), frames = x.dim(2), joints = x.dim(3);
    const std::size_t c_out = weight.dim(0);
    if (weight.dim(1) != c_in) {
        throw ShapeError("temporal_dilated_conv: weight expects " + std::to_string(weight.dim(1)) +
                         " input channels, got " + std::to_string(c_in));
    }
    const std::size_t out_frames = ceil_div(frames, stride);
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);

    // Maps (output frame, tap) to the source frame or -1 for padding.
    std::vector<std::ptrdiff_t> source(out_frames * taps);
    for (std::size_t t = 0; t < out_frames; ++t) {
        for (std::size_t j = 0; j < taps; ++j) {
            std::ptrdiff_t ti = static_cast<std::ptrdiff_t>(t * stride) +
                                (static_cast<std::ptrdiff_t>(j) - half) * static_cast<std::ptrdiff_t>(dilation);
            source[t * taps + j] = (ti >= 0 && ti < static_cast<std::ptrdiff_t>(frames)) ? ti : -1;
        }
    }

    auto xv = x.values();
    auto wv = weight.values();
    std::vector<double> out(n_batch * c_out * out_frames * joints, 0.0);
    for (std::size_t n = 0; n < n_batch; ++n) {
        for (std::size_t co = 0; co < c_out; ++co) {
            double* yrow = out.data() + (n * c_out + co) * out_frames * joints;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const double* xin = xv.data() + (n * c_in + ci) * frames * joints;
                for (std::size_t j = 0; j < taps; ++j) {
                    const double w = wv[(co * c_in + ci) * taps + j];
                    if (w == 0.0) continue;
                    for (std::size_t t = 0; t < out_frames; ++t) {
                        auto ti = source[t * taps + j];
                        if (ti < 0) continue;
                        const double* src = xin + static_cast<std::size_t>(ti) * joints;
                        double* dst = yrow + t * joints;
                        for (std::size_t v = 0; v < joints; ++v) dst[v] += w * src[v];
                    }
                }
            }
        }
    }
    return make_op_result(
        "temporal_dilated_conv", {n_batch, c_out, out_frames, joints}, std::move(out), {x, weight},
        [=, source = std::move(source)](Node& self) {
            const auto& xv = parent_value(self, 0);
            const auto& wv = parent_value(self, 1);
            const bool gx = wants(self, 0), gw = wants(self, 1);
            double* dx = gx ? parent_grad(self, 0).data() : nullptr;
            double* dw = gw ? parent_grad(self, 1).data() : nullptr;
            for (std::size_t n = 0; n < n_batch; ++n) {
                for (std::size_t co = 0; co < c_out; ++co) {
                    const double* dy = self.grad.data() + (n * c_out + co) * out_frames * joints;
                    for (std::size_t ci = 0; ci < c_in; ++ci) {
                        const std::size_t xoff = (n * c_in + ci) * frames * joints;
                        for (std::size_t j = 0; j < taps; ++j) {
                            const std::size_t widx = (co * c_in + ci) * taps + j;
                            const double w = wv[widx];
                            double acc = 0.0;
                            for (std::size_t t = 0; t < out_frames; ++t) {
                                auto ti = source[t * taps + j];
                                if (ti < 0) continue;
                                const std::size_t base = xoff + static_cast<std::size_t>(ti) * joints;
                                const double* g = dy + t * joints;
                                for (std::size_t v = 0; v < joints; ++v) {
                                    if (gx) dx[base + v] += w * g[v];
                                    acc += g[v] * xv[base + v];
                                }
                            }
                            if (gw) dw[widx] += acc;
                        }
                    }
                }
            }
        });
}

Tensor temporal_subsample(const Tensor& x, std::size_t stride)
{
    require_rank("temporal_subsample", x, 4);
    if (stride < 1) throw ShapeError("temporal_subsample: stride must be >= 1");
    const std::size_t outer = x.dim(0) * x.dim(1), frames = x.dim(2), joints = x.dim(3);
    const std::size_t out_frames = ceil_div(frames, stride);
    auto xv = x.values();
    std::vector<double> out(outer * out_frames * joints);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t t = 0; t < out_frames; ++t) {
            std::copy_n(xv.begin() + (o * frames + t * stride) * joints, joints,
                        out.begin() + (o * out_frames + t) * joints);
        }
    }
    return make_op_result("temporal_subsample", {x.dim(0), x.dim(1), out_frames, joints}, std::move(out),
                          {x}, [=](Node& self) {
                              auto& g = parent_grad(self, 0);
                              for (std::size_t o = 0; o < outer; ++o) {
                                  for (std::size_t t = 0; t < out_frames; ++t) {
                                      const double* src = self.grad.data() + (o * out_frames + t) * joints;
                                      double* dst = g.data() + (o * frames + t * stride) * joints;
                                      for (std::size_t v = 0; v < joints; ++v) dst[v] += src[v];
                                  }
                              }
                          });
}

Tensor pointwise_transform(const Tensor& x, const Tensor& weight)
{
    require_rank("pointwise_transform", x, 4);
    require_rank("pointwise_transform weight", weight, 2);
    const std::size_t n_batch = x.dim(0), c_in = x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    const std::size_t c_out = weight.dim(0);
    if (weight.dim(1) != c_in) {
        throw ShapeError("pointwise_transform: weight expects " + std::to_string(weight.dim(1)) +
                         " input channels, got " + std::to_string(c_in));
    }
    std::vector<double> out(n_batch * c_out * plane);
    ConstMap w(weight.values().data(), c_out, c_in);
    for (std::size_t n = 0; n < n_batch; ++n) {
        ConstMap xin(x.values().data() + n * c_in * plane, c_in, plane);
        MutMap y(out.data() + n * c_out * plane, c_out, plane);
        y.noalias() = w * xin;
    }
    return make_op_result(
        "pointwise_transform", {n_batch, c_out, x.dim(2), x.dim(3)}, std::move(out), {x, weight},
        [=](Node& self) {
            ConstMap w(parent_value(self, 1).data(), c_out, c_in);
            const bool gx = wants(self, 0), gw = wants(self, 1);
            double* dx = gx ? parent_grad(self, 0).data() : nullptr;
            double* dwp = gw ? parent_grad(self, 1).data() : nullptr;
            for (std::size_t n = 0; n < n_batch; ++n) {
                ConstMap dy(self.grad.data() + n * c_out * plane, c_out, plane);
                if (gx) {
                    MutMap dxin(dx + n * c_in * plane, c_in, plane);
                    dxin.noalias() += w.transpose() * dy;
                }
                if (gw) {
                    ConstMap xin(parent_value(self, 0).data() + n * c_in * plane, c_in, plane);
                    MutMap dw(dwp, c_out, c_in);
                    dw.noalias() += dy * xin.transpose();
                }
            }
        });
}

Tensor graph_aggregate(const Tensor& x, const Tensor& adjacency)
{
    require_rank("graph_aggregate", x, 4);
    require_rank("graph_aggregate adjacency", adjacency, 2);
    const std::size_t joints = x.dim(3);
    if (adjacency.dim(0) != joints || adjacency.dim(1) != joints) {
        throw ShapeError("graph_aggregate: adjacency " + shape_string(adjacency.shape()) +
                         " does not match " + std::to_string(joints) + " joints");
    }
    const std::size_t rows = x.size() / joints;
    std::vector<double> out(x.size());
    ConstMap a(adjacency.values().data(), joints, joints);
    ConstMap xin(x.values().data(), rows, joints);
    MutMap y(out.data(), rows, joints);
    y.noalias() = xin * a.transpose();
    return make_op_result("graph_aggregate", x.shape(), std::move(out), {x, adjacency}, [=](Node& self) {
        ConstMap dy(self.grad.data(), rows, joints);
        if (wants(self, 0)) {
            ConstMap a(parent_value(self, 1).data(), joints, joints);
            MutMap dx(parent_grad(self, 0).data(), rows, joints);
            dx.noalias() += dy * a;
        }
        if (wants(self, 1)) {
            ConstMap xin(parent_value(self, 0).data(), rows, joints);
            MutMap da(parent_grad(self, 1).data(), joints, joints);
            da.noalias() += dy.transpose() * xin;
        }
    });
}

Tensor adaptive_max_pool_2d(const Tensor& x)
{
    require_rank("adaptive_max_pool_2d", x, 4);
    const std::size_t rows = x.dim(0) * x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    auto xv = x.values();
    std::vector<double> out(rows);
    std::vector<std::size_t> argmax(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* p = xv.data() + r * plane;
        std::size_t best = 0;
        for (std::size_t i = 1; i < plane; ++i) {
            if (p[i] > p[best]) best = i;
        }
        argmax[r] = r * plane + best;
        out[r] = p[best];
    }
    return make_op_result("adaptive_max_pool_2d", {x.dim(0), x.dim(1)}, std::move(out), {x},
                          [argmax = std::move(argmax)](Node& self) {
                              auto& g = parent_grad(self, 0);
                              for (std::size_t r = 0; r < argmax.size(); ++r) g[argmax[r]] += self.grad[r];
                          });
}

Tensor global_avg_pool(const Tensor& x)
{
    require_rank("global_avg_pool", x, 4);
    const std::size_t rows = x.dim(0) * x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    auto xv = x.values();
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = std::accumulate(xv.begin() + r * plane, xv.begin() + (r + 1) * plane, 0.0) /
                 static_cast<double>(plane);
    }
    return make_op_result("global_avg_pool", {x.dim(0), x.dim(1)}, std::move(out), {x}, [=](Node& self) {
        auto& g = parent_grad(self, 0);
        const double inv = 1.0 / static_cast<double>(plane);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t i = 0; i < plane; ++i) g[r * plane + i] += self.grad[r] * inv;
        }
    });
}

Tensor channel_conv1d(const Tensor& c, const Tensor& kernel, std::size_t dilation)
{
    require_rank("channel_conv1d", c, 2);
    require_rank("channel_conv1d kernel", kernel, 1);
    const std::size_t taps = kernel.dim(0);
    if (taps % 2 == 0) throw ShapeError("channel_conv1d: kernel size must be odd");
    if (dilation < 1) throw ShapeError("channel_conv1d: dilation must be >= 1");
    const std::size_t rows = c.dim(0), channels = c.dim(1);
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
    const auto d = static_cast<std::ptrdiff_t>(dilation);
    const auto cn = static_cast<std::ptrdiff_t>(channels);
    auto cv = c.values();
    auto kv = kernel.values();
    std::vector<double> out(rows * channels, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::ptrdiff_t ch = 0; ch < cn; ++ch) {
            double acc = 0.0;
            for (std::size_t j = 0; j < taps; ++j) {
                std::ptrdiff_t src = ch + (static_cast<std::ptrdiff_t>(j) - half) * d;
                if (src >= 0 && src < cn) acc += kv[j] * cv[r * channels + static_cast<std::size_t>(src)];
            }
            out[r * channels + static_cast<std::size_t>(ch)] = acc;
        }
    }
    return make_op_result("channel_conv1d", c.shape(), std::move(out), {c, kernel}, [=](Node& self) {
        const auto& cv = parent_value(self, 0);
        const auto& kv = parent_value(self, 1);
        const bool gc = wants(self, 0), gk = wants(self, 1);
        double* dc = gc ? parent_grad(self, 0).data() : nullptr;
        double* dk = gk ? parent_grad(self, 1).data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::ptrdiff_t ch = 0; ch < cn; ++ch) {
                const double g = self.grad[r * channels + static_cast<std::size_t>(ch)];
                for (std::size_t j = 0; j < taps; ++j) {
                    std::ptrdiff_t src = ch + (static_cast<std::ptrdiff_t>(j) - half) * d;
                    if (src < 0 || src >= cn) continue;
                    const std::size_t si = r * channels + static_cast<std::size_t>(src);
                    if (gc) dc[si] += kv[j] * g;
                    if (gk) dk[j] += cv[si] * g;
                }
            }
        }
    });
}

Tensor channel_scale(const Tensor& x, const Tensor& weights)
{
    require_rank("channel_scale weights", weights, 2);
    if (x.rank() < 2 || x.dim(0) != weights.dim(0) || x.dim(1) != weights.dim(1)) {
        throw ShapeError("channel_scale: weights " + shape_string(weights.shape()) + " do not match " +
                         shape_string(x.shape()));
    }
    const std::size_t rows = weights.size();
    const std::size_t inner = x.size() / rows;
    auto xv = x.values();
    auto wv = weights.values();
    std::vector<double> out(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < inner; ++i) out[r * inner + i] = xv[r * inner + i] * wv[r];
    }
    return make_op_result("channel_scale", x.shape(), std::move(out), {x, weights}, [=](Node& self) {
        const auto& xv = parent_value(self, 0);
        const auto& wv = parent_value(self, 1);
        const bool gx = wants(self, 0), gw = wants(self, 1);
        double* dx = gx ? parent_grad(self, 0).data() : nullptr;
        double* dw = gw ? parent_grad(self, 1).data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < inner; ++i) {
                const double g = self.grad[r * inner + i];
                if (gx) dx[r * inner + i] += g * wv[r];
                acc += g * xv[r * inner + i];
            }
            if (gw) dw[r] += acc;
        }
    });
}

Tensor group_mean(const Tensor& x, std::size_t group)
{
    require_rank("group_mean", x, 2);
    if (group < 1 || x.dim(0) % group != 0) throw ShapeError("group_mean: batch not divisible by group");
    const std::size_t out_rows = x.dim(0) / group, cols = x.dim(1);
    auto xv = x.values();
    std::vector<double> out(out_rows * cols, 0.0);
    const double inv = 1.0 / static_cast<double>(group);
    for (std::size_t b = 0; b < out_rows; ++b) {
        for (std::size_t g = 0; g < group; ++g) {
            for (std::size_t c = 0; c < cols; ++c) out[b * cols + c] += xv[(b * group + g) * cols + c];
        }
        for (std::size_t c = 0; c < cols; ++c) out[b * cols + c] *= inv;
    }
    return make_op_result("group_mean", {out_rows, cols}, std::move(out), {x}, [=](Node& self) {
        auto& gx = parent_grad(self, 0);
        for (std::size_t b = 0; b < out_rows; ++b) {
            for (std::size_t g = 0; g < group; ++g) {
                for (std::size_t c = 0; c < cols; ++c) gx[(b * group + g) * cols + c] += self.grad[b * cols + c] * inv;
            }
        }
    });
}

} // namespace lsta::ops

#include "lsta/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lsta::ops {

std::vector<double> softmax_rows(const Tensor& logits)
{
    if (logits.rank() != 2) throw ShapeError("softmax_rows: expected [N,L] logits");
    const std::size_t rows = logits.dim(0), classes = logits.dim(1);
    auto lv = logits.values();
    std::vector<double> out(lv.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* z = lv.data() + r * classes;
        const double peak = *std::max_element(z, z + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            out[r * classes + c] = std::exp(z[c] - peak);
            total += out[r * classes + c];
        }
        for (std::size_t c = 0; c < classes; ++c) out[r * classes + c] /= total;
    }
    return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels)
{
    if (logits.rank() != 2) throw ShapeError("softmax_cross_entropy: expected [N,L] logits");
    const std::size_t rows = logits.dim(0), classes = logits.dim(1);
    if (labels.size() != rows) throw ShapeError("softmax_cross_entropy: label count mismatch");
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= classes) {
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                                    " outside [0," + std::to_string(classes) + ")");
        }
    }
    auto lv = logits.values();
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* z = lv.data() + r * classes;
        const double peak = *std::max_element(z, z + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) total += std::exp(z[c] - peak);
        // -log softmax = logsumexp - z[label]
        loss += peak + std::log(total) - z[labels[r]];
    }
    loss /= static_cast<double>(rows);
    std::vector<int> targets(labels.begin(), labels.end());
    return make_op_result("softmax_cross_entropy", {1}, {loss}, {logits},
                          [rows, classes, targets = std::move(targets)](detail::Node& self) {
                              const auto& parent = *self.parents[0];
                              Tensor view(parent.shape, parent.value);
                              auto probs = softmax_rows(view);
                              auto& g = self.parents[0]->ensure_grad();
                              const double scale = self.grad[0] / static_cast<double>(rows);
                              for (std::size_t r = 0; r < rows; ++r) {
                                  for (std::size_t c = 0; c < classes; ++c) {
                                      double target = static_cast<int>(c) == targets[r] ? 1.0 : 0.0;
                                      g[r * classes + c] += scale * (probs[r * classes + c] - target);
                                  }
                              }
                          });
}

} // namespace lsta::ops

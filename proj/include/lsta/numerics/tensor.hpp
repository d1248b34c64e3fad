#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsta {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// One vertex of the reverse-mode graph. `backward` reads `grad` and
// accumulates into the parents' grads.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    std::vector<double>& ensure_grad();
};

} // namespace detail

/// Handle to an immutable dense N-d array with optional gradient tracking.
/// Copies share storage; only leaves (parameters and buffers) may be
/// mutated in place.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const;

    std::span<const double> values() const;
    double operator[](std::size_t i) const { return values()[i]; }
    double item() const;

    bool is_leaf() const;
    /// In-place access for leaves only; throws for op results.
    std::span<double> mutable_values();

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool has_grad() const;
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();
    void clear_grad();

    /// Reverse sweep from a scalar. Throws NumericError if any gradient
    /// reaching a leaf is non-finite.
    void backward() const;

    /// Fresh leaf holding a copy of the values; detached from any graph.
    Tensor detach() const;

    const std::shared_ptr<detail::Node>& node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;

    friend Tensor make_op_result(const char*, Shape, std::vector<double>,
                                 std::vector<Tensor>, std::function<void(detail::Node&)>);
};

/// Builds the output of a differentiable op. Validates finiteness and
/// records `backward` when grad mode is on and any input requires grad.
Tensor make_op_result(const char* op_name, Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward);

bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

} // namespace lsta

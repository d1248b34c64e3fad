#include "lsta/numerics/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace lsta {

namespace {
thread_local bool g_grad_enabled = true;

void check_finite(const char* what, std::span<const double> values)
{
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value produced by ") + what);
        }
    }
}
} // namespace

std::size_t shape_size(const Shape& shape)
{
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::string shape_string(const Shape& shape)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

std::vector<double>& detail::Node::ensure_grad()
{
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
{
    for (auto e : shape) {
        if (e == 0) throw ShapeError("tensor extents must be positive: " + shape_string(shape));
    }
    if (shape_size(shape) != values.size()) {
        throw ShapeError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
    }
    check_finite("tensor construction", values);
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->value = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad)
{
    auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad)
{
    auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad)
{
    return Tensor({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const
{
    if (!node_) throw std::logic_error("undefined tensor");
    return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const
{
    const auto& s = shape();
    if (axis >= s.size()) throw ShapeError("axis out of range for shape " + shape_string(s));
    return s[axis];
}

std::size_t Tensor::size() const { return shape_size(shape()); }

std::span<const double> Tensor::values() const
{
    if (!node_) throw std::logic_error("undefined tensor");
    return node_->value;
}

double Tensor::item() const
{
    if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_string(shape()));
    return node_->value[0];
}

bool Tensor::is_leaf() const { return node_ && !node_->backward; }

std::span<double> Tensor::mutable_values()
{
    if (!is_leaf()) throw std::logic_error("in-place mutation of a non-leaf tensor");
    return node_->value;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag)
{
    if (!is_leaf()) throw std::logic_error("requires_grad can only be set on leaves");
    node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const
{
    if (!has_grad()) throw std::logic_error("tensor has no gradient");
    return node_->grad;
}

std::span<double> Tensor::mutable_grad() { return node_->ensure_grad(); }

void Tensor::zero_grad()
{
    if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::clear_grad()
{
    if (node_) {
        node_->grad.clear();
        node_->grad.shrink_to_fit();
    }
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value, false); }

void Tensor::backward() const
{
    if (size() != 1) throw ShapeError("backward() requires a scalar output");
    if (!node_->requires_grad) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            auto* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    node_->ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (node->backward && !node->grad.empty()) {
            node->backward(*node);
            // Intermediate gradients are not needed past this point.
            node->grad.clear();
            node->grad.shrink_to_fit();
        }
    }
    // Every reachable leaf gets a gradient, zero when no path carried one
    // (e.g. the losing side of an elementwise maximum).
    for (auto* node : order) {
        if (!node->backward) check_finite("backward pass", node->ensure_grad());
    }
}

Tensor make_op_result(const char* op_name, Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward)
{
    check_finite(op_name, values);
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    if (g_grad_enabled) {
        bool any = false;
        for (const auto& in : inputs) any = any || in.requires_grad();
        if (any) {
            node->requires_grad = true;
            for (auto& in : inputs) node->parents.push_back(in.node());
            node->backward = std::move(backward);
        }
    }
    return Tensor(std::move(node));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

} // namespace lsta

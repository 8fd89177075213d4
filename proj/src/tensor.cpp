#include "semsal/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace semsal {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto extent : shape) n *= extent;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor() = default;

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
    for (auto extent : shape) {
        if (extent == 0) throw ShapeError("tensor extents must be positive: " + shape_string(shape));
    }
    if (data.size() != shape_numel(shape)) {
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_string(shape));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
    if (requires_grad) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) throw ShapeError("axis out of range for " + shape_string(shape()));
    return node_->shape[axis];
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape_string(shape()));
    return node_->data[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data, false); }

Tensor Tensor::clone() const { return Tensor(node_->shape, node_->data, node_->requires_grad); }

void Tensor::backward() const {
    if (numel() != 1) throw ShapeError("backward() requires a scalar loss, got " + shape_string(shape()));
    if (!node_->requires_grad) throw std::logic_error("backward() on a tensor that is not on the tape");

    // Iterative post-order DFS gives a topological order of the reachable graph.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            detail::Node* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* node : order) {
        if (node->backward) node->grad.assign(node->data.size(), 0.0);
    }
    node_->grad[0] += 1.0;

    std::vector<std::vector<double>*> sinks;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (!node->backward) continue;
        sinks.clear();
        for (auto& input : node->inputs) sinks.push_back(input->requires_grad ? &input->grad : nullptr);
        node->backward(node->grad, sinks);
    }
}

Tensor record(Shape shape, std::vector<double> data, std::vector<Tensor> inputs, detail::BackwardFn backward) {
    Tensor out(std::move(shape), std::move(data), false);
    if (!g_grad_enabled) return out;
    bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (!any) return out;
    auto& node = *out.node_;
    node.requires_grad = true;
    node.grad.assign(node.data.size(), 0.0);
    node.inputs.reserve(inputs.size());
    for (auto& t : inputs) node.inputs.push_back(t.node_);
    node.backward = std::move(backward);
    return out;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace semsal

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semsal {

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes violate an operation's contract.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on non-finite values or degenerate numerics that cannot be recovered.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;

namespace detail {

// Receives the output gradient and one accumulation buffer per input
// (nullptr when that input does not take part in differentiation).
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<std::vector<double>*> grad_in)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardFn backward;
};

}  // namespace detail

/// Dense row-major float64 tensor that optionally records the operations
/// producing it, so that `backward()` can propagate gradients to leaves.
///
/// A Tensor is a handle: copies share storage and graph position. Use
/// `clone()` for an independent copy and `detach()` to cut the graph.
class Tensor {
public:
    Tensor();
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const { return node_->data.size(); }
    bool defined() const { return static_cast<bool>(node_); }

    std::span<const double> data() const { return node_->data; }
    /// Direct write access. Only meaningful for leaves (parameters, inputs);
    /// mutating an interior node invalidates recorded gradients.
    std::span<double> mutable_data() { return node_->data; }
    double item() const;
    double operator[](std::size_t flat) const { return node_->data[flat]; }

    bool requires_grad() const { return node_->requires_grad; }
    bool is_leaf() const { return !node_->backward; }
    std::span<const double> grad() const { return node_->grad; }
    std::span<double> mutable_grad() { return node_->grad; }
    void zero_grad();

    /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
    /// calls; interior gradients are recomputed each time.
    void backward() const;

    Tensor detach() const;
    Tensor clone() const;

    /// Identity of the underlying storage, for parameter bookkeeping.
    const void* id() const { return node_.get(); }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;

    friend Tensor record(Shape, std::vector<double>, std::vector<Tensor>, detail::BackwardFn);
};

/// Wraps a freshly computed result. When gradient recording is enabled and
/// any input requires grad, the result joins the graph with `backward` as
/// its local rule; otherwise it is a constant.
Tensor record(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
              detail::BackwardFn backward);

/// True unless a NoGradGuard is alive on this thread.
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

}  // namespace semsal

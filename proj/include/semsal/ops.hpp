#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "semsal/tensor.hpp"

namespace semsal {

enum class UnaryOp { neg, exp, log, sqrt, abs, square, sigmoid, softplus };
enum class BinaryOp { add, sub, mul, div };

// Binary ops require equal shapes, except that either operand may hold a
// single element, which is then broadcast.
Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor elementwise(UnaryOp op, const Tensor& x);

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::mul, a, b); }
inline Tensor div(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::div, a, b); }
inline Tensor neg(const Tensor& x) { return elementwise(UnaryOp::neg, x); }
inline Tensor exp(const Tensor& x) { return elementwise(UnaryOp::exp, x); }
inline Tensor log(const Tensor& x) { return elementwise(UnaryOp::log, x); }
inline Tensor sqrt(const Tensor& x) { return elementwise(UnaryOp::sqrt, x); }
inline Tensor abs(const Tensor& x) { return elementwise(UnaryOp::abs, x); }
inline Tensor square(const Tensor& x) { return elementwise(UnaryOp::square, x); }
inline Tensor sigmoid(const Tensor& x) { return elementwise(UnaryOp::sigmoid, x); }
inline Tensor softplus(const Tensor& x) { return elementwise(UnaryOp::softplus, x); }

Tensor leaky_relu(const Tensor& x, double slope);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Affine map of row vectors: x [m x k] * w [k x n] + bias [n] per row.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

/// Same data, new shape of equal element count.
Tensor reshape(const Tensor& x, Shape shape);

/// Concatenates along the leading axis; trailing extents must agree.
Tensor concat(std::span<const Tensor> parts);
/// Inverse of concat: splits the leading axis into pieces of the given sizes.
std::vector<Tensor> split(const Tensor& x, std::span<const std::size_t> sizes);

/// Crops rows [y0,y1) and columns [x0,x1) of a C x H x W tensor.
Tensor crop(const Tensor& x, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1);

/// Picks flat elements by index into a 1-D result.
Tensor gather(const Tensor& x, std::span<const std::size_t> indices);

/// Numerically stable softmax over all elements of a 1-D tensor.
Tensor softmax(const Tensor& x);

/// Stride-1 cross-correlation with zero "same" padding.
/// x: C_in x H x W, kernels: C_out x C_in x k x k (k odd), bias: C_out or undefined.
Tensor conv2d(const Tensor& x, const Tensor& kernels, const Tensor& bias = Tensor());

/// 2x2 average downsampling of C x H x W; output extents ceil(H/2) x ceil(W/2),
/// partial cells averaging only the pixels they cover.
Tensor avg_pool2(const Tensor& x);

/// C x H x W -> C (per-channel spatial mean).
Tensor global_avg_pool(const Tensor& x);

/// Per-channel max over an out_h x out_w partition of C x H x W where cell i
/// spans [floor(i*H/out_h), ceil((i+1)*H/out_h)).
Tensor adaptive_max_pool(const Tensor& x, std::size_t out_h, std::size_t out_w);

/// Bilinear resampling of C x H x W to C x out_h x out_w using half-pixel
/// centers (align_corners = false) with edge clamping.
Tensor bilinear_upsample(const Tensor& x, std::size_t out_h, std::size_t out_w);

/// sum_i weights[i] * items[i]; weights is 1-D with one entry per item and all
/// items share a shape.
Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> items);

}  // namespace semsal

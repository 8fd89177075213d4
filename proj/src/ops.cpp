#include "semsal/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semsal {

namespace {

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
    if (x.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
    }
}

double sigmoid_scalar(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
}

double softplus_scalar(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

}  // namespace

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b) {
    const bool a_scalar = a.numel() == 1 && b.numel() != 1;
    const bool b_scalar = b.numel() == 1 && a.numel() != 1;
    if (!a_scalar && !b_scalar && a.shape() != b.shape()) {
        throw ShapeError("elementwise: shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
    const Shape& shape = a_scalar ? b.shape() : a.shape();
    const std::size_t n = shape_numel(shape);
    auto av = a.data();
    auto bv = b.data();
    auto ai = [&](std::size_t i) { return a_scalar ? av[0] : av[i]; };
    auto bi = [&](std::size_t i) { return b_scalar ? bv[0] : bv[i]; };

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (op) {
            case BinaryOp::add: out[i] = ai(i) + bi(i); break;
            case BinaryOp::sub: out[i] = ai(i) - bi(i); break;
            case BinaryOp::mul: out[i] = ai(i) * bi(i); break;
            case BinaryOp::div: out[i] = ai(i) / bi(i); break;
        }
    }

    return record(shape, std::move(out), {a, b},
                  [op, a, b, a_scalar, b_scalar, n](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      auto av = a.data();
                      auto bv = b.data();
                      for (std::size_t i = 0; i < n; ++i) {
                          const std::size_t ia = a_scalar ? 0 : i;
                          const std::size_t ib = b_scalar ? 0 : i;
                          double da = 0, db = 0;
                          switch (op) {
                              case BinaryOp::add: da = g[i]; db = g[i]; break;
                              case BinaryOp::sub: da = g[i]; db = -g[i]; break;
                              case BinaryOp::mul: da = g[i] * bv[ib]; db = g[i] * av[ia]; break;
                              case BinaryOp::div:
                                  da = g[i] / bv[ib];
                                  db = -g[i] * av[ia] / (bv[ib] * bv[ib]);
                                  break;
                          }
                          if (gin[0]) (*gin[0])[ia] += da;
                          if (gin[1]) (*gin[1])[ib] += db;
                      }
                  });
}

Tensor elementwise(UnaryOp op, const Tensor& x) {
    auto xv = x.data();
    const std::size_t n = xv.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = xv[i];
        switch (op) {
            case UnaryOp::neg: out[i] = -v; break;
            case UnaryOp::exp: out[i] = std::exp(v); break;
            case UnaryOp::log: out[i] = std::log(v); break;
            case UnaryOp::sqrt: out[i] = std::sqrt(v); break;
            case UnaryOp::abs: out[i] = std::fabs(v); break;
            case UnaryOp::square: out[i] = v * v; break;
            case UnaryOp::sigmoid: out[i] = sigmoid_scalar(v); break;
            case UnaryOp::softplus: out[i] = softplus_scalar(v); break;
        }
    }
    // Rules needing the output keep a copy; the rest read the input.
    std::vector<double> saved;
    if (op == UnaryOp::exp || op == UnaryOp::sqrt || op == UnaryOp::sigmoid) saved = out;
    return record(x.shape(), std::move(out), {x},
                  [op, x, saved = std::move(saved)](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      auto& gx = *gin[0];
                      auto xv = x.data();
                      for (std::size_t i = 0; i < g.size(); ++i) {
                          double d = 0;
                          switch (op) {
                              case UnaryOp::neg: d = -1; break;
                              case UnaryOp::exp: d = saved[i]; break;
                              case UnaryOp::log: d = 1.0 / xv[i]; break;
                              case UnaryOp::sqrt: d = 0.5 / saved[i]; break;
                              case UnaryOp::abs: d = xv[i] > 0 ? 1.0 : (xv[i] < 0 ? -1.0 : 0.0); break;
                              case UnaryOp::square: d = 2 * xv[i]; break;
                              case UnaryOp::sigmoid: d = saved[i] * (1 - saved[i]); break;
                              case UnaryOp::softplus: d = sigmoid_scalar(xv[i]); break;
                          }
                          gx[i] += g[i] * d;
                      }
                  });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    auto xv = x.data();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0 ? xv[i] : slope * xv[i];
    return record(x.shape(), std::move(out), {x}, [x, slope](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto xv = x.data();
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += xv[i] > 0 ? g[i] : slope * g[i];
    });
}

Tensor scale(const Tensor& x, double factor) {
    auto xv = x.data();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * factor;
    return record(x.shape(), std::move(out), {x}, [factor](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    });
}

Tensor add_scalar(const Tensor& x, double offset) {
    auto xv = x.data();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + offset;
    return record(x.shape(), std::move(out), {x}, [](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

Tensor sum(const Tensor& x) {
    auto xv = x.data();
    double total = std::accumulate(xv.begin(), xv.end(), 0.0);
    return record({1}, {total}, {x}, [](std::span<const double> g, std::span<std::vector<double>*> gin) {
        for (auto& v : *gin[0]) v += g[0];
    });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner extents differ " + shape_string(a.shape()) + " * " + shape_string(b.shape()));
    }
    auto av = a.data();
    auto bv = b.data();
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = &bv[p * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    return record({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto av = a.data();
        auto bv = b.data();
        if (gin[0]) {  // dA = dC * B^T
            auto& ga = *gin[0];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
                    ga[i * k + p] += acc;
                }
        }
        if (gin[1]) {  // dB = A^T * dC
            auto& gb = *gin[1];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = av[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
                }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    require_rank(bias, 1, "linear");
    const Tensor prod = matmul(x, w);
    const std::size_t m = prod.dim(0), n = prod.dim(1);
    if (bias.dim(0) != n) throw ShapeError("linear: bias length does not match output width");
    std::vector<double> out(prod.data().begin(), prod.data().end());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias[j];
    return record({m, n}, std::move(out), {prod, bias}, [m, n](std::span<const double> g, std::span<std::vector<double>*> gin) {
        if (gin[0]) {
            auto& gp = *gin[0];
            for (std::size_t i = 0; i < m * n; ++i) gp[i] += g[i];
        }
        if (gin[1]) {
            auto& gb = *gin[1];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
    });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw ShapeError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
    }
    std::vector<double> out(x.data().begin(), x.data().end());
    return record(std::move(shape), std::move(out), {x}, [](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

Tensor concat(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    Shape shape = parts[0].shape();
    Shape trailing(shape.begin() + 1, shape.end());
    std::size_t lead = 0;
    for (const auto& p : parts) {
        if (p.rank() != shape.size() || Shape(p.shape().begin() + 1, p.shape().end()) != trailing) {
            throw ShapeError("concat: trailing extents differ " + shape_string(shape) + " vs " + shape_string(p.shape()));
        }
        lead += p.dim(0);
    }
    shape[0] = lead;
    std::vector<double> out;
    out.reserve(shape_numel(shape));
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        offsets.push_back(out.size());
        out.insert(out.end(), p.data().begin(), p.data().end());
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return record(shape, std::move(out), inputs, [offsets](std::span<const double> g, std::span<std::vector<double>*> gin) {
        for (std::size_t k = 0; k < gin.size(); ++k) {
            if (!gin[k]) continue;
            auto& gk = *gin[k];
            for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += g[offsets[k] + i];
        }
    });
}

std::vector<Tensor> split(const Tensor& x, std::span<const std::size_t> sizes) {
    if (x.rank() == 0) throw ShapeError("split: rank-0 tensor");
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (total != x.dim(0)) throw ShapeError("split: sizes do not sum to leading extent of " + shape_string(x.shape()));
    const std::size_t stride = x.numel() / x.dim(0);
    std::vector<Tensor> pieces;
    std::size_t row = 0;
    for (auto size : sizes) {
        Shape shape = x.shape();
        shape[0] = size;
        const std::size_t begin = row * stride;
        std::vector<double> out(x.data().begin() + begin, x.data().begin() + begin + size * stride);
        pieces.push_back(record(shape, std::move(out), {x}, [begin](std::span<const double> g, std::span<std::vector<double>*> gin) {
            auto& gx = *gin[0];
            for (std::size_t i = 0; i < g.size(); ++i) gx[begin + i] += g[i];
        }));
        row += size;
    }
    return pieces;
}

Tensor crop(const Tensor& x, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1) {
    require_rank(x, 3, "crop");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    if (!(y0 < y1 && y1 <= H && x0 < x1 && x1 <= W)) throw ShapeError("crop: window outside " + shape_string(x.shape()));
    const std::size_t h = y1 - y0, w = x1 - x0;
    std::vector<double> out(C * h * w);
    auto xv = x.data();
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t xx = 0; xx < w; ++xx) out[(c * h + y) * w + xx] = xv[(c * H + y + y0) * W + xx + x0];
    return record({C, h, w}, std::move(out), {x}, [=](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t xx = 0; xx < w; ++xx) gx[(c * H + y + y0) * W + xx + x0] += g[(c * h + y) * w + xx];
    });
}

Tensor gather(const Tensor& x, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ShapeError("gather: empty index list");
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.numel()) throw ShapeError("gather: index out of range");
        out[i] = x[idx[i]];
    }
    return record({idx.size()}, std::move(out), {x}, [idx](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < idx.size(); ++i) gx[idx[i]] += g[i];
    });
}

Tensor softmax(const Tensor& x) {
    require_rank(x, 1, "softmax");
    auto xv = x.data();
    for (double v : xv) {
        if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");
    }
    const double peak = *std::max_element(xv.begin(), xv.end());
    std::vector<double> out(xv.size());
    double total = 0;
    for (std::size_t i = 0; i < xv.size(); ++i) total += out[i] = std::exp(xv[i] - peak);
    for (auto& v : out) v /= total;
    std::vector<double> saved = out;
    return record(x.shape(), std::move(out), {x}, [saved](std::span<const double> g, std::span<std::vector<double>*> gin) {
        double dot = 0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * saved[i];
        auto& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += saved[i] * (g[i] - dot);
    });
}

namespace {

// Valid output range for a kernel offset d under same padding.
struct Span1 {
    std::size_t lo, hi;
};
Span1 valid_range(std::ptrdiff_t d, std::size_t n) {
    const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -d));
    const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n), static_cast<std::ptrdiff_t>(n) - d));
    return {lo, std::max(lo, hi)};
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernels, const Tensor& bias) {
    require_rank(x, 3, "conv2d");
    require_rank(kernels, 4, "conv2d");
    const std::size_t Cin = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t Cout = kernels.dim(0), K = kernels.dim(2);
    if (kernels.dim(1) != Cin) {
        throw ShapeError("conv2d: kernel expects " + std::to_string(kernels.dim(1)) + " input channels, got " +
                         std::to_string(Cin));
    }
    if (kernels.dim(3) != K || K % 2 == 0) throw ShapeError("conv2d: kernels must be square with odd size");
    const bool has_bias = bias.defined();
    if (has_bias && (bias.rank() != 1 || bias.dim(0) != Cout)) throw ShapeError("conv2d: bias must have one entry per output channel");
    const auto pad = static_cast<std::ptrdiff_t>(K / 2);

    auto xv = x.data();
    auto wv = kernels.data();
    std::vector<double> out(Cout * H * W, 0.0);
    for (std::size_t co = 0; co < Cout; ++co) {
        double* oc = &out[co * H * W];
        if (has_bias) std::fill(oc, oc + H * W, bias[co]);
        for (std::size_t ci = 0; ci < Cin; ++ci) {
            const double* ic = &xv[ci * H * W];
            for (std::size_t ky = 0; ky < K; ++ky) {
                const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
                const auto ry = valid_range(dy, H);
                for (std::size_t kx = 0; kx < K; ++kx) {
                    const double w = wv[((co * Cin + ci) * K + ky) * K + kx];
                    if (w == 0.0) continue;
                    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
                    const auto rx = valid_range(dx, W);
                    for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                        double* orow = oc + y * W;
                        const double* irow = ic + static_cast<std::ptrdiff_t>(y + dy) * static_cast<std::ptrdiff_t>(W) + dx;
                        for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) orow[xx] += w * irow[xx];
                    }
                }
            }
        }
    }

    std::vector<Tensor> inputs{x, kernels};
    if (has_bias) inputs.push_back(bias);
    return record({Cout, H, W}, std::move(out), inputs,
                  [=](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      auto xv = x.data();
                      auto wv = kernels.data();
                      std::vector<double>* gx = gin[0];
                      std::vector<double>* gw = gin[1];
                      for (std::size_t co = 0; co < Cout; ++co) {
                          const double* gc = &g[co * H * W];
                          if (has_bias && gin[2]) {
                              double acc = 0;
                              for (std::size_t i = 0; i < H * W; ++i) acc += gc[i];
                              (*gin[2])[co] += acc;
                          }
                          for (std::size_t ci = 0; ci < Cin; ++ci) {
                              const double* ic = &xv[ci * H * W];
                              for (std::size_t ky = 0; ky < K; ++ky) {
                                  const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
                                  const auto ry = valid_range(dy, H);
                                  for (std::size_t kx = 0; kx < K; ++kx) {
                                      const std::size_t widx = ((co * Cin + ci) * K + ky) * K + kx;
                                      const double w = wv[widx];
                                      const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
                                      const auto rx = valid_range(dx, W);
                                      double acc = 0;
                                      for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                                          const double* grow = gc + y * W;
                                          const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(y + dy) * static_cast<std::ptrdiff_t>(W) + dx;
                                          const double* irow = ic + off;
                                          if (gw) {
                                              for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) acc += grow[xx] * irow[xx];
                                          }
                                          if (gx && w != 0.0) {
                                              double* gxrow = gx->data() + ci * H * W + off;
                                              for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) gxrow[xx] += w * grow[xx];
                                          }
                                      }
                                      if (gw) (*gw)[widx] += acc;
                                  }
                              }
                          }
                      }
                  });
}

Tensor avg_pool2(const Tensor& x) {
    require_rank(x, 3, "avg_pool2");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t h = (H + 1) / 2, w = (W + 1) / 2;
    auto xv = x.data();
    std::vector<double> out(C * h * w, 0.0);
    std::vector<double> inv_count(h * w);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t rows = std::min<std::size_t>(2, H - 2 * i), cols = std::min<std::size_t>(2, W - 2 * j);
            inv_count[i * w + j] = 1.0 / static_cast<double>(rows * cols);
        }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t xx = 0; xx < W; ++xx) {
                const std::size_t cell = (y / 2) * w + xx / 2;
                out[c * h * w + cell] += xv[(c * H + y) * W + xx] * inv_count[cell];
            }
    return record({C, h, w}, std::move(out), {x}, [=](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx) {
                    const std::size_t cell = (y / 2) * w + xx / 2;
                    gx[(c * H + y) * W + xx] += g[c * h * w + cell] * inv_count[cell];
                }
    });
}

Tensor global_avg_pool(const Tensor& x) {
    require_rank(x, 3, "global_avg_pool");
    const std::size_t C = x.dim(0), HW = x.dim(1) * x.dim(2);
    auto xv = x.data();
    std::vector<double> out(C);
    for (std::size_t c = 0; c < C; ++c) {
        out[c] = std::accumulate(xv.begin() + c * HW, xv.begin() + (c + 1) * HW, 0.0) / static_cast<double>(HW);
    }
    return record({C}, std::move(out), {x}, [C, HW](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t c = 0; c < C; ++c) {
            const double d = g[c] / static_cast<double>(HW);
            for (std::size_t i = 0; i < HW; ++i) gx[c * HW + i] += d;
        }
    });
}

Tensor adaptive_max_pool(const Tensor& x, std::size_t out_h, std::size_t out_w) {
    require_rank(x, 3, "adaptive_max_pool");
    if (out_h == 0 || out_w == 0) throw ShapeError("adaptive_max_pool: target extents must be positive");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto xv = x.data();
    std::vector<double> out(C * out_h * out_w);
    std::vector<std::size_t> argmax(out.size());
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < out_h; ++i) {
            const std::size_t y0 = i * H / out_h, y1 = ((i + 1) * H + out_h - 1) / out_h;
            for (std::size_t j = 0; j < out_w; ++j) {
                const std::size_t x0 = j * W / out_w, x1 = ((j + 1) * W + out_w - 1) / out_w;
                std::size_t best = (c * H + y0) * W + x0;
                for (std::size_t y = y0; y < y1; ++y)
                    for (std::size_t xx = x0; xx < x1; ++xx) {
                        const std::size_t idx = (c * H + y) * W + xx;
                        if (xv[idx] > xv[best]) best = idx;
                    }
                const std::size_t o = (c * out_h + i) * out_w + j;
                out[o] = xv[best];
                argmax[o] = best;
            }
        }
    return record({C, out_h, out_w}, std::move(out), {x}, [argmax](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto& gx = *gin[0];
        for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
    });
}

namespace {

struct Tap {
    std::size_t lo, hi;
    double frac;  // weight of hi
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
    std::vector<Tap> taps(out);
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
        if (src < 0) src = 0;
        auto lo = static_cast<std::size_t>(src);
        if (lo > in - 1) lo = in - 1;
        const std::size_t hi = std::min(lo + 1, in - 1);
        taps[i] = {lo, hi, hi == lo ? 0.0 : src - static_cast<double>(lo)};
    }
    return taps;
}

}  // namespace

Tensor bilinear_upsample(const Tensor& x, std::size_t out_h, std::size_t out_w) {
    require_rank(x, 3, "bilinear_upsample");
    if (out_h == 0 || out_w == 0) throw ShapeError("bilinear_upsample: target extents must be positive");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    auto ty = bilinear_taps(H, out_h);
    auto tx = bilinear_taps(W, out_w);
    auto xv = x.data();
    std::vector<double> out(C * out_h * out_w);
    for (std::size_t c = 0; c < C; ++c) {
        const double* ic = &xv[c * H * W];
        for (std::size_t i = 0; i < out_h; ++i) {
            const auto& a = ty[i];
            for (std::size_t j = 0; j < out_w; ++j) {
                const auto& b = tx[j];
                const double top = ic[a.lo * W + b.lo] * (1 - b.frac) + ic[a.lo * W + b.hi] * b.frac;
                const double bot = ic[a.hi * W + b.lo] * (1 - b.frac) + ic[a.hi * W + b.hi] * b.frac;
                out[(c * out_h + i) * out_w + j] = top * (1 - a.frac) + bot * a.frac;
            }
        }
    }
    return record({C, out_h, out_w}, std::move(out), {x},
                  [=](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      auto& gx = *gin[0];
                      for (std::size_t c = 0; c < C; ++c) {
                          double* gc = gx.data() + c * H * W;
                          for (std::size_t i = 0; i < out_h; ++i) {
                              const auto& a = ty[i];
                              for (std::size_t j = 0; j < out_w; ++j) {
                                  const auto& b = tx[j];
                                  const double d = g[(c * out_h + i) * out_w + j];
                                  gc[a.lo * W + b.lo] += d * (1 - a.frac) * (1 - b.frac);
                                  gc[a.lo * W + b.hi] += d * (1 - a.frac) * b.frac;
                                  gc[a.hi * W + b.lo] += d * a.frac * (1 - b.frac);
                                  gc[a.hi * W + b.hi] += d * a.frac * b.frac;
                              }
                          }
                      }
                  });
}

Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> items) {
    require_rank(weights, 1, "weighted_sum");
    if (items.empty() || weights.dim(0) != items.size()) throw ShapeError("weighted_sum: one weight per item required");
    const Shape& shape = items[0].shape();
    for (const auto& it : items) {
        if (it.shape() != shape) throw ShapeError("weighted_sum: item shapes differ");
    }
    const std::size_t n = shape_numel(shape);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < items.size(); ++k) {
        const double w = weights[k];
        auto iv = items[k].data();
        for (std::size_t i = 0; i < n; ++i) out[i] += w * iv[i];
    }
    std::vector<Tensor> inputs{weights};
    inputs.insert(inputs.end(), items.begin(), items.end());
    return record(shape, std::move(out), inputs, [inputs, n](std::span<const double> g, std::span<std::vector<double>*> gin) {
        auto wv = inputs[0].data();
        for (std::size_t k = 1; k < inputs.size(); ++k) {
            auto iv = inputs[k].data();
            if (gin[0]) {
                double acc = 0;
                for (std::size_t i = 0; i < n; ++i) acc += g[i] * iv[i];
                (*gin[0])[k - 1] += acc;
            }
            if (gin[k]) {
                auto& gk = *gin[k];
                for (std::size_t i = 0; i < n; ++i) gk[i] += wv[k - 1] * g[i];
            }
        }
    });
}

}  // namespace semsal

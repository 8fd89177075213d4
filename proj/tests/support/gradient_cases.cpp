#include <array>
#include <memory>

#include "gradcheck.hpp"
#include "semsal/model.hpp"
#include "semsal/ops.hpp"
#include "semsal/proposals.hpp"
#include "semsal/saliency_head.hpp"
#include "semsal/sgat.hpp"
#include "semsal/spn.hpp"

namespace semsal::testing {

namespace {

const std::array<Shape, kGradVariants> kShapes{Shape{5}, Shape{2, 3}, Shape{3, 1, 4}, Shape{1, 7}, Shape{2, 2, 2}};

GradCase unary(std::string name, std::function<Tensor(const Tensor&)> op, double lo = 0, double hi = 0) {
    return {std::move(name), [lo, hi](Rng& rng, int v) { return std::vector{random_tensor(rng, kShapes[v], lo, hi)}; },
            [op](const std::vector<Tensor>& x) { return op(x[0]); }};
}

GradCase binary(std::string name, BinaryOp op) {
    return {std::move(name),
            [op](Rng& rng, int v) {
                // Denominators stay away from zero.
                const double lo = op == BinaryOp::div ? 0.5 : 0, hi = op == BinaryOp::div ? 2.0 : 0;
                return std::vector{random_tensor(rng, kShapes[v]), random_tensor(rng, kShapes[v], lo, hi)};
            },
            [op](const std::vector<Tensor>& x) { return elementwise(op, x[0], x[1]); }};
}

std::vector<Tensor> spn_inputs(Rng& rng, std::size_t regions, std::size_t channels) {
    std::vector<Tensor> in;
    for (std::size_t i = 0; i < regions; ++i) in.push_back(random_tensor(rng, {channels, 2, 3}));
    std::size_t width = 2 * channels;
    for (std::size_t out : {SpnParams::kHidden[0], SpnParams::kHidden[1], SpnParams::kHidden[2], std::size_t{1}}) {
        in.push_back(he_param({width, out}, width, rng));
        in.push_back(normal_param({out}, 0.1, rng));
        width = out;
    }
    return in;
}

SpnParams spn_from(const std::vector<Tensor>& x, std::size_t regions) {
    SpnParams p;
    for (std::size_t k = regions; k < x.size(); k += 2) {
        p.weights.push_back(x[k]);
        p.biases.push_back(x[k + 1]);
    }
    return p;
}

template <typename T>
std::vector<T> first(const std::vector<T>& x, std::size_t n) {
    return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)};
}

PredictedGraph fixed_graph(std::size_t p, int variant) {
    PredictedGraph g;
    g.regions = p;
    g.scores.assign(p * p, 0.0);
    std::vector<double> s(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) s[i * p + j] = i == j || (i + j + static_cast<std::size_t>(variant)) % 3 != 0 ? 1.0 : 0.0;
    g.scores = s;
    g.neighbors = threshold_neighbors(s, p, 0.5);
    return g;
}

SgatParams sgat_from(const std::vector<Tensor>& x, std::size_t offset, std::size_t heads) {
    SgatParams p;
    for (std::size_t k = 0; k < heads; ++k) {
        p.filters.push_back(x[offset + 2 * k]);
        p.attention.push_back(x[offset + 2 * k + 1]);
    }
    return p;
}

std::vector<Tensor> sgat_param_inputs(Rng& rng, std::size_t channels, std::size_t heads) {
    std::vector<Tensor> in;
    const std::size_t c = channels / heads;
    for (std::size_t k = 0; k < heads; ++k) {
        in.push_back(random_tensor(rng, {c, channels, 3, 3}));
        in.push_back(random_tensor(rng, {2 * c}));
    }
    return in;
}

const std::vector<Box> kRoiBoxes{{0, 0, 16, 16}, {8, 4, 40, 20}, {12, 10, 20, 30}, {30, 0, 40, 32}};

}  // namespace

std::vector<GradCase> gradient_cases() {
    std::vector<GradCase> cases;
    cases.push_back(binary("add", BinaryOp::add));
    cases.push_back(binary("sub", BinaryOp::sub));
    cases.push_back(binary("mul", BinaryOp::mul));
    cases.push_back(binary("div", BinaryOp::div));
    cases.push_back({"mul_scalar_operand",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, kShapes[v]), random_tensor(rng, {1})}; },
                     [](const std::vector<Tensor>& x) { return add(mul(x[0], x[1]), div(x[1], add_scalar(square(x[0]), 1.0))); }});
    cases.push_back(unary("neg", [](const Tensor& x) { return neg(x); }));
    cases.push_back(unary("exp", [](const Tensor& x) { return exp(x); }));
    cases.push_back(unary("log", [](const Tensor& x) { return log(x); }, 0.3, 3.0));
    cases.push_back(unary("sqrt", [](const Tensor& x) { return sqrt(x); }, 0.3, 3.0));
    cases.push_back(unary("abs", [](const Tensor& x) { return abs(x); }));
    cases.push_back(unary("square", [](const Tensor& x) { return square(x); }));
    cases.push_back(unary("sigmoid", [](const Tensor& x) { return sigmoid(x); }));
    cases.push_back(unary("softplus", [](const Tensor& x) { return softplus(x); }));
    cases.push_back(unary("leaky_relu", [](const Tensor& x) { return leaky_relu(x, 0.2); }));
    cases.push_back(unary("scale", [](const Tensor& x) { return scale(x, -1.7); }));
    cases.push_back(unary("add_scalar", [](const Tensor& x) { return add_scalar(x, 0.3); }));
    cases.push_back(unary("sum", [](const Tensor& x) { return sum(x); }));
    cases.push_back(unary("mean", [](const Tensor& x) { return mean(x); }));
    cases.push_back(unary("softmax", [](const Tensor& x) { return softmax(reshape(x, {x.numel()})); }));
    cases.push_back(unary("reshape", [](const Tensor& x) { return square(reshape(x, {x.numel(), 1})); }));
    cases.push_back(unary("gather", [](const Tensor& x) {
        const std::vector<std::size_t> idx{0, x.numel() - 1, 0, x.numel() / 2};
        return gather(x, idx);
    }));

    cases.push_back({"matmul",
                     [](Rng& rng, int v) {
                         const std::size_t m = 1 + v, k = 2 + (v % 3), n = 1 + (v * 2) % 5;
                         return std::vector{random_tensor(rng, {m, k}), random_tensor(rng, {k, n})};
                     },
                     [](const std::vector<Tensor>& x) { return matmul(x[0], x[1]); }});
    cases.push_back({"linear",
                     [](Rng& rng, int v) {
                         const std::size_t m = 1 + v, k = 2 + (v % 3), n = 1 + (v * 2) % 5;
                         return std::vector{random_tensor(rng, {m, k}), random_tensor(rng, {k, n}), random_tensor(rng, {n})};
                     },
                     [](const std::vector<Tensor>& x) { return linear(x[0], x[1], x[2]); }});
    cases.push_back({"concat",
                     [](Rng& rng, int v) {
                         const std::size_t tail = 1 + v;
                         return std::vector{random_tensor(rng, {2, tail}), random_tensor(rng, {1, tail}), random_tensor(rng, {3, tail})};
                     },
                     [](const std::vector<Tensor>& x) { return square(concat(x)); }});
    cases.push_back({"split",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {4, std::size_t(1 + v)})}; },
                     [](const std::vector<Tensor>& x) {
                         const std::size_t sizes[3] = {1, 2, 1};
                         auto parts = split(x[0], sizes);
                         const Tensor reordered[3] = {scale(parts[2], 2.0), square(parts[0]), parts[1]};
                         return concat(reordered);
                     }});
    cases.push_back({"crop",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {std::size_t(1 + v % 2), 5, 6})}; },
                     [](const std::vector<Tensor>& x) { return square(crop(x[0], 1, 4, 2, 6)); }});
    cases.push_back({"conv2d",
                     [](Rng& rng, int v) {
                         const std::size_t cin = 1 + v % 3, cout = 1 + (v + 1) % 3, k = v == 4 ? 5 : (v % 2 ? 1 : 3);
                         const std::size_t h = 3 + v, w = 4 + (v % 2);
                         return std::vector{random_tensor(rng, {cin, h, w}), random_tensor(rng, {cout, cin, k, k}),
                                            random_tensor(rng, {cout})};
                     },
                     [](const std::vector<Tensor>& x) { return conv2d(x[0], x[1], x[2]); }});
    cases.push_back({"conv2d_no_bias",
                     [](Rng& rng, int v) {
                         return std::vector{random_tensor(rng, {2, std::size_t(2 + v), 3}), random_tensor(rng, {3, 2, 3, 3})};
                     },
                     [](const std::vector<Tensor>& x) { return conv2d(x[0], x[1]); }});
    cases.push_back({"avg_pool2",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {2, std::size_t(2 + v), std::size_t(3 + v)})}; },
                     [](const std::vector<Tensor>& x) { return avg_pool2(x[0]); }});
    cases.push_back({"global_avg_pool",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {3, std::size_t(1 + v), 4})}; },
                     [](const std::vector<Tensor>& x) { return global_avg_pool(x[0]); }});
    cases.push_back({"adaptive_max_pool",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {2, std::size_t(2 + 2 * v), std::size_t(9 - v)})}; },
                     [](const std::vector<Tensor>& x) { return adaptive_max_pool(x[0], 4, 3); }});
    cases.push_back({"bilinear_upsample",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {2, std::size_t(1 + v), std::size_t(2 + v)})}; },
                     [](const std::vector<Tensor>& x) { return bilinear_upsample(x[0], 7, 3); }});
    cases.push_back({"weighted_sum",
                     [](Rng& rng, int v) {
                         const Shape s{2, std::size_t(1 + v)};
                         return std::vector{random_tensor(rng, {3}), random_tensor(rng, s), random_tensor(rng, s), random_tensor(rng, s)};
                     },
                     [](const std::vector<Tensor>& x) { return weighted_sum(x[0], std::span(x).subspan(1)); }});

    // Region plumbing.
    cases.push_back({"roi_features",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {std::size_t(1 + v % 3), 4, 5})}; },
                     [](const std::vector<Tensor>& x) {
                         const FeatureMap fm{x[0], 8};
                         return concat(extract_roi_features(fm, kRoiBoxes, 3, 2).features);
                     }});
    cases.push_back({"project_back",
                     [](Rng& rng, int v) {
                         std::vector<Tensor> blocks;
                         for (std::size_t k = 0; k < kRoiBoxes.size(); ++k) blocks.push_back(random_tensor(rng, {2, std::size_t(2 + v), 3}));
                         return blocks;
                     },
                     [](const std::vector<Tensor>& x) { return project_back({Tensor::zeros({2, 4, 5}), 8}, kRoiBoxes, x); }});
    cases.push_back({"backbone",
                     [](Rng& rng, int v) {
                         Rng init = rng.fork(static_cast<std::uint64_t>(v));
                         const auto p = BackboneParams::init(init, 4);
                         return std::vector{random_tensor(rng, {3, 32, std::size_t(32 + 4 * v)}, 0, 1), p.conv1_w, p.conv1_b, p.conv2_w,
                                            p.conv2_b, p.conv3_w, p.conv3_b};
                     },
                     [](const std::vector<Tensor>& x) {
                         return encode_backbone(x[0], {x[1], x[2], x[3], x[4], x[5], x[6]}).map;
                     },
                     6});

    // Edge prediction and distillation.
    cases.push_back({"spn_pair_scores",
                     [](Rng& rng, int v) { return spn_inputs(rng, 2 + v % 3, 3); },
                     [](const std::vector<Tensor>& x) {
                         const std::size_t p = x.size() - 8;
                         return predict_graph(spn_from(x, p), first(x, p), 0.5).pair_scores;
                     },
                     8});
    cases.push_back({"prox_loss",
                     [](Rng& rng, int v) { return spn_inputs(rng, 2 + v % 3, 3); },
                     [](const std::vector<Tensor>& x) {
                         const std::size_t p = x.size() - 8;
                         const ProximityGraph ext{{"a", "b", "c"}, {1, 0.8, 0.1, 0.8, 1, 0.4, 0.1, 0.4, 1}, 0.3};
                         const std::vector<std::string> labels{"a", "b", "c", "a"};
                         return prox_loss(predict_graph(spn_from(x, p), first(x, p), 0.3), ext, first(labels, p));
                     },
                     8});

    // Graph attention.
    cases.push_back({"attention_coeff",
                     [](Rng& rng, int v) {
                         auto in = std::vector{random_tensor(rng, {4, 3, std::size_t(2 + v)}), random_tensor(rng, {4, 3, std::size_t(2 + v)})};
                         for (auto& t : sgat_param_inputs(rng, 4, 2)) in.push_back(t);
                         return in;
                     },
                     [](const std::vector<Tensor>& x) { return attention_coeff(sgat_from(x, 2, 2), 1, x[0], x[1]); }});
    cases.push_back({"sgat_forward",
                     [](Rng& rng, int v) {
                         std::vector<Tensor> in;
                         for (int i = 0; i < 4; ++i) in.push_back(random_tensor(rng, {4, 3, 3}));
                         for (auto& t : sgat_param_inputs(rng, 4, v % 2 ? 4 : 2)) in.push_back(t);
                         return in;
                     },
                     [](const std::vector<Tensor>& x) {
                         const std::size_t heads = (x.size() - 4) / 2;
                         const auto g = fixed_graph(4, static_cast<int>(heads));
                         const auto out = sgat_forward(sgat_from(x, 4, heads), first(x, 4), g);
                         return concat(out.blocks);
                     }});
    cases.push_back({"fuse_updates",
                     [](Rng& rng, int v) {
                         const std::size_t n = 1 + v % 3;
                         std::vector<Tensor> in{random_tensor(rng, {3, 3 * n, 1, 1}), random_tensor(rng, {3})};
                         for (std::size_t l = 0; l < n; ++l)
                             for (int i = 0; i < 2; ++i) in.push_back(random_tensor(rng, {3, 2, 2}));
                         return in;
                     },
                     [](const std::vector<Tensor>& x) {
                         const std::size_t n = x[0].dim(1) / 3;
                         std::vector<std::vector<Tensor>> sets(n);
                         for (std::size_t l = 0; l < n; ++l) sets[l] = {x[2 + 2 * l], x[3 + 2 * l]};
                         return concat(fuse_updates({x[0], x[1]}, sets));
                     }});

    // Priors, head and losses.
    cases.push_back({"prior_maps",
                     [](Rng& rng, int v) {
                         std::vector<double> raw;
                         for (int r = 0; r <= v; ++r) {
                             raw.insert(raw.end(), {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(-2, 0), rng.uniform(-2, 0)});
                         }
                         return std::vector{Tensor({std::size_t(v + 1), 4}, raw, true)};
                     },
                     [](const std::vector<Tensor>& x) { return prior_maps({x[0]}, 4, 5); }});
    cases.push_back({"baseline_features",
                     [](Rng& rng, int v) {
                         return std::vector{random_tensor(rng, {3, std::size_t(2 + v), 4}), random_tensor(rng, {3, 3, 3, 3}), random_tensor(rng, {3})};
                     },
                     [](const std::vector<Tensor>& x) { return baseline_features({x[1], x[2]}, x[0]); }});
    cases.push_back({"head_predict",
                     [](Rng& rng, int v) {
                         Rng init = rng.fork(static_cast<std::uint64_t>(v));
                         const auto head = HeadParams::init(init, 5);
                         return std::vector{random_tensor(rng, {2, 3, 4}), random_tensor(rng, {2, 3, 4}), random_tensor(rng, {1, 3, 4}),
                                            head.conv1_w, head.conv1_b, head.conv2_w, head.conv2_b};
                     },
                     [](const std::vector<Tensor>& x) { return predict({x[3], x[4], x[5], x[6]}, x[0], x[1], x[2], 12, 16); },
                     12});
    cases.push_back({"cc_term",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {std::size_t(3 + v), 4}), random_tensor(rng, {std::size_t(3 + v), 4})}; },
                     [](const std::vector<Tensor>& x) { return cc_term(x[0], x[1]); }});
    cases.push_back({"nss_term",
                     [](Rng& rng, int v) { return std::vector{random_tensor(rng, {std::size_t(3 + v), 5})}; },
                     [](const std::vector<Tensor>& x) { return nss_term(x[0], {{0, 0}, {4, 1}, {2, 2}, {2, 2}}); }});
    cases.push_back({"loss_sal",
                     [](Rng& rng, int v) {
                         return std::vector{random_tensor(rng, {std::size_t(3 + v), 5}, 0.05, 0.95), random_tensor(rng, {std::size_t(3 + v), 5}, 0, 1)};
                     },
                     [](const std::vector<Tensor>& x) { return loss_sal(x[0], x[1], {{1, 0}, {4, 2}, {0, 2}}, {0.3, 0.15, 0.8}); }});
    cases.push_back({"loss_total",
                     [](Rng& rng, int v) {
                         std::vector<Tensor> in{random_tensor(rng, {1})};
                         for (int l = 0; l <= v % 3; ++l) in.push_back(random_tensor(rng, {1}));
                         return in;
                     },
                     [](const std::vector<Tensor>& x) { return loss_total(x[0], {x.begin() + 1, x.end()}, 0.8); }});

    // The assembled network and its objective, probing a few entries of
    // every parameter tensor.
    auto model = std::make_shared<Model>();
    cases.push_back({"model_objective",
                     [model](Rng& rng, int v) {
                         const ProximityGraph g{{"a", "b", "c"}, {1, 0.9, 0.2, 0.9, 1, 0.1, 0.2, 0.1, 1}, 0.5};
                         const std::vector<ProximityGraph> graphs = v % 2 ? std::vector<ProximityGraph>{g, g} : std::vector{g};
                         *model = Model::init({8, 2, v < 3, 2}, graphs, static_cast<std::uint64_t>(v) + 1);
                         std::vector<Tensor> in{random_tensor(rng, {3, 32, 32}, 0, 1)};
                         for (const auto& t : tensors_of(model->parameters())) in.push_back(t);
                         return in;
                     },
                     [model](const std::vector<Tensor>& x) {
                         const std::vector<Box> boxes{{1, 2, 13, 12}, {16, 16, 30, 28}, {4, 18, 14, 31}};
                         const auto out = forward(*model, x[0], boxes);
                         std::vector<double> dens(32 * 32, 1e-3);
                         for (int y = 16; y < 28; ++y)
                             for (int xx = 16; xx < 30; ++xx) dens[y * 32 + xx] = 1.0;
                         const auto loss = sample_loss(*model, out, Tensor({32, 32}, dens), {{20, 20}, {5, 5}, {25, 22}},
                                                       {"a", "b", "c"}, {0.3, 0.15, 0.8});
                         return loss.total;
                     },
                     2});
    return cases;
}

}  // namespace semsal::testing

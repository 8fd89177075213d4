#include <gtest/gtest.h>

#include <cmath>

#include "semsal/ops.hpp"
#include "semsal/sgat.hpp"

namespace semsal {
namespace {

std::vector<Tensor> random_blocks(Rng& rng, std::size_t p, std::size_t c, std::size_t d = 3) {
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < p; ++i) {
        std::vector<double> v(c * d * d);
        for (auto& x : v) x = rng.normal();
        out.emplace_back(Shape{c, d, d}, v);
    }
    return out;
}

PredictedGraph graph_from(std::size_t p, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<double> s(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) s[i * p + i] = 1.0;
    for (auto [i, j] : edges) s[i * p + j] = s[j * p + i] = 1.0;
    PredictedGraph g;
    g.regions = p;
    g.scores = s;
    g.neighbors = threshold_neighbors(s, p, 0.5);
    return g;
}

double leaky(double x, double slope) { return x > 0 ? x : slope * x; }

TEST(Sgat, AttentionRowsSumToOne) {
    Rng rng(1);
    const auto params = SgatParams::init(rng, 8, 4);
    const auto h = random_blocks(rng, 5, 8);
    const auto out = sgat_forward(params, h, graph_from(5, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {1, 4}}));
    ASSERT_EQ(out.attention.size(), 4u);
    for (const auto& head : out.attention)
        for (const auto& row : head) {
            double s = 0;
            for (double a : row.data()) s += a;
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    for (const auto& b : out.blocks) EXPECT_EQ(b.shape(), (Shape{8, 3, 3}));
}

TEST(Sgat, NonNeighboursDoNotLeak) {
    Rng rng(2);
    const auto params = SgatParams::init(rng, 4, 2);
    auto h = random_blocks(rng, 4, 4);
    const auto g = graph_from(4, {{0, 1}, {2, 3}});
    const auto before = sgat_forward(params, h, g);
    h[3] = add_scalar(h[3], 10.0);
    const auto after = sgat_forward(params, h, g);
    for (std::size_t i : {0u, 1u}) {
        for (std::size_t k = 0; k < before.blocks[i].numel(); ++k) EXPECT_EQ(before.blocks[i][k], after.blocks[i][k]);
    }
    double moved = 0;
    for (std::size_t k = 0; k < before.blocks[2].numel(); ++k) moved += std::abs(before.blocks[2][k] - after.blocks[2][k]);
    EXPECT_GT(moved, 0);
}

TEST(Sgat, IsolatedNodeKeepsItsOwnTransform) {
    Rng rng(3);
    const auto params = SgatParams::init(rng, 4, 1);
    const auto h = random_blocks(rng, 2, 4);
    const auto out = sgat_forward(params, h, graph_from(2, {}));
    const Tensor expect = leaky_relu(conv2d(h[0], params.filters[0]), kUpdateSlope);
    for (std::size_t k = 0; k < expect.numel(); ++k) EXPECT_NEAR(out.blocks[0][k], expect[k], 1e-15);
    EXPECT_EQ(out.attention[0][0].item(), 1.0);
}

TEST(Sgat, IdenticalMutualNodesMatch) {
    Rng rng(4);
    const auto params = SgatParams::init(rng, 4, 2);
    const auto h = random_blocks(rng, 1, 4);
    const auto out = sgat_forward(params, {h[0], h[0]}, graph_from(2, {{0, 1}}));
    for (std::size_t k = 0; k < out.blocks[0].numel(); ++k) EXPECT_EQ(out.blocks[0][k], out.blocks[1][k]);
}

TEST(Sgat, ZeroAttentionVectorGivesZeroLogits) {
    Rng rng(5);
    auto params = SgatParams::init(rng, 4, 2);
    params.attention[1] = Tensor::zeros({4});
    const auto h = random_blocks(rng, 2, 4);
    EXPECT_EQ(attention_coeff(params, 1, h[0], h[1]).item(), 0.0);
    EXPECT_NE(attention_coeff(params, 0, h[0], h[1]).item(), attention_coeff(params, 0, h[1], h[0]).item());
}

TEST(Sgat, ThreeNodePathByHand) {
    // One head, one channel, 1x1 blocks: only the kernel centre matters.
    const double w = 0.7, a1 = 0.4, a2 = -1.3;
    std::vector<double> kernel(9, 0.0);
    kernel[4] = w;
    SgatParams params{{Tensor({1, 1, 3, 3}, kernel)}, {Tensor({2}, {a1, a2})}};
    const double x[3] = {1.5, -2.0, 0.5};
    std::vector<Tensor> h;
    for (double v : x) h.push_back(Tensor({1, 1, 1}, {v}));
    const auto out = sgat_forward(params, h, graph_from(3, {{0, 1}, {1, 2}}));

    const std::vector<std::vector<std::size_t>> nbrs{{0, 1}, {0, 1, 2}, {1, 2}};
    for (std::size_t i = 0; i < 3; ++i) {
        double denom = 0, num = 0;
        for (auto j : nbrs[i]) denom += std::exp(leaky(a1 * w * x[i] + a2 * w * x[j], 0.2));
        for (auto j : nbrs[i]) num += std::exp(leaky(a1 * w * x[i] + a2 * w * x[j], 0.2)) / denom * w * x[j];
        EXPECT_NEAR(out.blocks[i].item(), leaky(num, 0.01), 1e-12);
    }
}

TEST(Fuse, IdentityWithOneSourcePassesThrough) {
    Rng rng(6);
    const auto h = random_blocks(rng, 2, 4);
    const auto fused = fuse_updates(FuseParams::identity(4, 1), {h});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < h[i].numel(); ++k) EXPECT_EQ(fused[i][k], h[i][k]);
}

TEST(Fuse, ProjectsToCAndReachesBothSources) {
    Rng rng(7);
    auto a = random_blocks(rng, 2, 4), b = random_blocks(rng, 2, 4);
    for (auto* set : {&a, &b})
        for (auto& t : *set) t = Tensor(t.shape(), {t.data().begin(), t.data().end()}, true);
    const auto params = FuseParams::init(rng, 4, 2);
    const auto fused = fuse_updates(params, {a, b});
    EXPECT_EQ(fused[0].shape(), (Shape{4, 3, 3}));
    sum(add(fused[0], fused[1])).backward();
    for (const auto& t : {a[0], b[1]}) {
        double norm = 0;
        for (double g : t.grad()) norm += std::abs(g);
        EXPECT_GT(norm, 0);
    }
}

}  // namespace
}  // namespace semsal

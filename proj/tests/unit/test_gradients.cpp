#include <gtest/gtest.h>

#include "gradcheck.hpp"

namespace semsal::testing {
namespace {

class GradientCase : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientCase, MatchesCentralDifferences) {
    const auto cases = gradient_cases();
    const auto& c = cases[GetParam()];
    Rng rng(1000 + GetParam());
    for (int v = 0; v < kGradVariants; ++v) {
        const auto r = gradcheck(c.fn, c.inputs(rng, v), rng, c.max_probes);
        EXPECT_TRUE(r.passed) << c.name << " variant " << v << ": rel " << r.max_rel_error << ", abs " << r.max_abs_error << ", kinks " << r.kinks;
        EXPECT_GT(r.probes, 0u);
    }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientCase, ::testing::Range<std::size_t>(0, gradient_cases().size()),
                         [](const auto& info) { return gradient_cases()[info.param].name; });

TEST(GradCheck, DetectsAWrongGradient) {
    // A hand-built op whose backward is off by a factor of two.
    const GradFn bad = [](const std::vector<Tensor>& x) {
        std::vector<double> y(x[0].data().begin(), x[0].data().end());
        for (auto& v : y) v = v * v;
        return record(x[0].shape(), std::move(y), {x[0]}, [x0 = x[0]](std::span<const double> g, std::span<std::vector<double>*> gin) {
            for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += 4 * x0[i] * g[i];
        });
    };
    Rng rng(3);
    EXPECT_FALSE(gradcheck(bad, {random_tensor(rng, {4})}, rng).passed);
}

}  // namespace
}  // namespace semsal::testing

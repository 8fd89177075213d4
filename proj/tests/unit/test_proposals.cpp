#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "semsal/ops.hpp"
#include "semsal/proposals.hpp"
#include "semsal/tensor_io.hpp"

namespace semsal {
namespace {

TEST(Box, ValidationRejectsDegenerateAndOutside) {
    EXPECT_NO_THROW(validate_box({0, 0, 64, 64}, 64, 64));
    EXPECT_THROW(validate_box({3, 0, 3, 5}, 64, 64), std::invalid_argument);
    EXPECT_THROW(validate_box({0, 0, 65, 5}, 64, 64), std::invalid_argument);
    EXPECT_THROW(validate_box({-1, 0, 5, 5}, 64, 64), std::invalid_argument);
}

TEST(Box, FeatureCellsFloorStartAndCeilEnd) {
    const auto c = to_feature_cells({9, 0, 17, 8}, 8, 8, 8);
    EXPECT_EQ(c.x0, 1u);
    EXPECT_EQ(c.x1, 3u);
    EXPECT_EQ(c.y0, 0u);
    EXPECT_EQ(c.y1, 1u);
    const auto tiny = to_feature_cells({63, 63, 64, 64}, 8, 8, 8);
    EXPECT_EQ(tiny.x1 - tiny.x0, 1u);
}

TEST(Backbone, OutputShapeAndFiniteOnZeroImage) {
    Rng rng(1);
    const auto p = BackboneParams::init(rng);
    const auto fm = encode_backbone(Tensor::zeros({3, 64, 64}), p);
    EXPECT_EQ(fm.map.shape(), (Shape{32, 8, 8}));
    EXPECT_EQ(fm.stride, 8u);
    for (double v : fm.map.data()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_THROW(encode_backbone(Tensor::zeros({3, 16, 64}), p), ShapeError);
}

TEST(Backbone, GradientsReachEveryConvolution) {
    Rng rng(2);
    const auto p = BackboneParams::init(rng, 8);
    std::vector<double> img(3 * 32 * 32);
    for (auto& v : img) v = rng.uniform();
    sum(encode_backbone(Tensor({3, 32, 32}, img), p).map).backward();
    NamedParams named;
    p.collect("", named);
    for (const auto& [name, t] : named) {
        double norm = 0;
        for (double g : t.grad()) norm += g * g;
        EXPECT_GT(norm, 0) << name;
    }
}

TEST(Roi, FullBoxPoolsWholeMap) {
    std::vector<double> v(16);
    for (int i = 0; i < 16; ++i) v[i] = i + 1;
    const FeatureMap fm{Tensor({1, 4, 4}, v), 8};
    const auto r = extract_roi_features(fm, {{0, 0, 32, 32}}, 2, 2);
    const std::vector<double> expect{6, 8, 14, 16};
    for (int i = 0; i < 4; ++i) EXPECT_EQ(r.features[0][i], expect[i]);
}

TEST(Roi, LeftHalfQuadrantMaxima) {
    std::vector<double> v(16);
    for (int i = 0; i < 16; ++i) v[i] = i + 1;
    const FeatureMap fm{Tensor({1, 4, 4}, v), 8};
    // Left half: columns 0-1 -> [[1,2],[5,6],[9,10],[13,14]].
    const auto r = extract_roi_features(fm, {{0, 0, 16, 32}}, 2, 2);
    const std::vector<double> expect{5, 6, 13, 14};
    for (int i = 0; i < 4; ++i) EXPECT_EQ(r.features[0][i], expect[i]);
}

TEST(Roi, IdenticalBoxesGiveIdenticalBlocks) {
    Rng rng(3);
    std::vector<double> v(2 * 8 * 8);
    for (auto& x : v) x = rng.normal();
    const FeatureMap fm{Tensor({2, 8, 8}, v), 8};
    const auto r = extract_roi_features(fm, {{5, 9, 30, 40}, {5, 9, 30, 40}});
    EXPECT_EQ(r.features[0].shape(), (Shape{2, 7, 7}));
    for (std::size_t i = 0; i < r.features[0].numel(); ++i) EXPECT_EQ(r.features[0][i], r.features[1][i]);
}

TEST(ProjectBack, ConstantBlockFillsItsBox) {
    const FeatureMap fm{Tensor::zeros({1, 4, 4}), 8};
    const auto m = project_back(fm, {{8, 8, 24, 16}}, {Tensor::full({1, 7, 7}, 5.0)});
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            const bool inside = y == 1 && (x == 1 || x == 2);
            EXPECT_EQ(m[y * 4 + x], inside ? 5.0 : 0.0);
        }
}

TEST(ProjectBack, OverlapTakesTheMaximum) {
    const FeatureMap fm{Tensor::zeros({1, 4, 4}), 8};
    const auto m = project_back(fm, {{0, 0, 24, 24}, {8, 8, 32, 32}}, {Tensor::full({1, 3, 3}, 2.0), Tensor::full({1, 3, 3}, 7.0)});
    EXPECT_EQ(m[1 * 4 + 1], 7.0);
    EXPECT_EQ(m[0], 2.0);
    EXPECT_EQ(m[3 * 4 + 3], 7.0);
    EXPECT_EQ(m[3 * 4 + 0], 0.0);
}

TEST(ProjectBack, NegativeValuesInsideOneBoxSurvive) {
    const FeatureMap fm{Tensor::zeros({1, 4, 4}), 8};
    const auto m = project_back(fm, {{0, 0, 8, 8}}, {Tensor::full({1, 2, 2}, -3.0)});
    EXPECT_EQ(m[0], -3.0);
    EXPECT_EQ(m[1], 0.0);
}

TEST(ProjectBack, NoBoxesGiveZeros) {
    const FeatureMap fm{Tensor::full({3, 2, 2}, 1.0), 8};
    const auto m = project_back(fm, {}, {});
    EXPECT_EQ(m.shape(), (Shape{3, 2, 2}));
    for (double v : m.data()) EXPECT_EQ(v, 0.0);
}

TEST(BoxFile, RoundTripsWithLabels) {
    const auto path = std::filesystem::temp_directory_path() / "semsal_boxes_test.txt";
    const LabeledBoxes in{{{1, 2, 10, 12}, {20, 30, 40, 50}}, {"dog", "cup"}};
    save_boxes(path, in);
    const auto out = load_boxes(path);
    EXPECT_EQ(out.boxes, in.boxes);
    EXPECT_EQ(out.labels, in.labels);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace semsal

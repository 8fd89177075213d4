#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "semsal/params.hpp"
#include "semsal/random.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

/// Half-open pixel rectangle [x0,x1) x [y0,y1) in image space.
struct Box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool operator==(const Box&) const = default;
};

/// Throws std::invalid_argument unless x0<x1, y0<y1 and the box lies inside
/// a width x height image.
void validate_box(const Box& box, std::size_t width, std::size_t height);

/// Box file lines: `x0,y0,x1,y1[,label]`. Labels are either present on every
/// line or on none.
struct LabeledBoxes {
    std::vector<Box> boxes;
    std::vector<std::string> labels;
};
LabeledBoxes load_boxes(const std::filesystem::path& path);
void save_boxes(const std::filesystem::path& path, const LabeledBoxes& boxes);

/// Backbone output together with its downsampling factor.
struct FeatureMap {
    Tensor map;  // C x H' x W'
    std::size_t stride = 8;

    std::size_t channels() const { return map.dim(0); }
    std::size_t height() const { return map.dim(1); }
    std::size_t width() const { return map.dim(2); }
};

/// Box rows/columns [y0,y1) x [x0,x1) on the feature grid.
struct CellBox {
    std::size_t x0, y0, x1, y1;
};

/// Scales an image-space box by 1/stride (floor for the start, ceil for the
/// end), clamped to the grid. Always spans at least one cell.
CellBox to_feature_cells(const Box& box, std::size_t stride, std::size_t grid_w, std::size_t grid_h);

/// Regional features h_i with optional per-region category labels.
struct RegionSet {
    std::vector<Box> boxes;
    std::vector<Tensor> features;     // each C x d1 x d2
    std::vector<std::string> labels;  // empty or one per box

    std::size_t size() const { return boxes.size(); }
};

inline constexpr std::size_t kBackboneChannels = 32;
inline constexpr std::size_t kBackboneStride = 8;
inline constexpr std::size_t kRoiSize = 7;
inline constexpr double kBackboneSlope = 0.01;

/// Three {3x3 conv, leaky ReLU, 2x2 average pool} blocks: 3 -> 16 -> 32 -> C.
struct BackboneParams {
    Tensor conv1_w, conv1_b, conv2_w, conv2_b, conv3_w, conv3_b;

    static BackboneParams init(Rng& rng, std::size_t channels = kBackboneChannels);
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// Encodes a 3 x H x W image (H, W >= 32) into a C x ceil(H/8) x ceil(W/8) map.
FeatureMap encode_backbone(const Tensor& image, const BackboneParams& params);

/// ROI max pooling of every box to C x d1 x d2.
RegionSet extract_roi_features(const FeatureMap& fm, const std::vector<Box>& boxes, std::size_t d1 = kRoiSize,
                               std::size_t d2 = kRoiSize);

/// Resizes each block to its box's feature-grid extent and writes it into a
/// fresh map shaped like `fm` (channels taken from the blocks). Overlaps take
/// the elementwise max; cells no box touches are zero. Gradients flow to the
/// block that supplied each maximum.
Tensor project_back(const FeatureMap& fm, const std::vector<Box>& boxes, const std::vector<Tensor>& blocks);

}  // namespace semsal

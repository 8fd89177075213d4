#include "semsal/proposals.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "semsal/ops.hpp"
#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal {

void validate_box(const Box& box, std::size_t width, std::size_t height) {
    if (box.x0 < 0 || box.y0 < 0 || box.x0 >= box.x1 || box.y0 >= box.y1 ||
        static_cast<std::size_t>(box.x1) > width || static_cast<std::size_t>(box.y1) > height) {
        throw std::invalid_argument("box (" + std::to_string(box.x0) + "," + std::to_string(box.y0) + "," +
                                    std::to_string(box.x1) + "," + std::to_string(box.y1) + ") invalid for " +
                                    std::to_string(width) + "x" + std::to_string(height) + " image");
    }
}

LabeledBoxes load_boxes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    LabeledBoxes out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        auto cells = text::split(line, ',');
        if (cells.size() != 4 && cells.size() != 5) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected x0,y0,x1,y1[,label]");
        }
        Box b{static_cast<int>(text::parse_long(cells[0], "x0")), static_cast<int>(text::parse_long(cells[1], "y0")),
              static_cast<int>(text::parse_long(cells[2], "x1")), static_cast<int>(text::parse_long(cells[3], "y1"))};
        out.boxes.push_back(b);
        if (cells.size() == 5) out.labels.push_back(cells[4]);
    }
    if (!out.labels.empty() && out.labels.size() != out.boxes.size()) {
        throw FormatError(path.string() + ": labels must be given for all boxes or none");
    }
    return out;
}

void save_boxes(const std::filesystem::path& path, const LabeledBoxes& boxes) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    for (std::size_t i = 0; i < boxes.boxes.size(); ++i) {
        const auto& b = boxes.boxes[i];
        out << b.x0 << "," << b.y0 << "," << b.x1 << "," << b.y1;
        if (!boxes.labels.empty()) out << "," << boxes.labels[i];
        out << "\n";
    }
}

CellBox to_feature_cells(const Box& box, std::size_t stride, std::size_t grid_w, std::size_t grid_h) {
    const auto s = static_cast<int>(stride);
    auto clamp = [](int v, std::size_t hi) { return static_cast<std::size_t>(std::clamp(v, 0, static_cast<int>(hi))); };
    CellBox c{clamp(box.x0 / s, grid_w), clamp(box.y0 / s, grid_h), clamp((box.x1 + s - 1) / s, grid_w),
              clamp((box.y1 + s - 1) / s, grid_h)};
    if (c.x0 >= grid_w) c.x0 = grid_w - 1;
    if (c.y0 >= grid_h) c.y0 = grid_h - 1;
    c.x1 = std::max(c.x1, c.x0 + 1);
    c.y1 = std::max(c.y1, c.y0 + 1);
    return c;
}

BackboneParams BackboneParams::init(Rng& rng, std::size_t channels) {
    BackboneParams p;
    p.conv1_w = he_param({16, 3, 3, 3}, 3 * 9, rng);
    p.conv1_b = zero_param({16});
    p.conv2_w = he_param({32, 16, 3, 3}, 16 * 9, rng);
    p.conv2_b = zero_param({32});
    p.conv3_w = he_param({channels, 32, 3, 3}, 32 * 9, rng);
    p.conv3_b = zero_param({channels});
    return p;
}

void BackboneParams::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + "conv1_w", conv1_w);
    out.emplace_back(prefix + "conv1_b", conv1_b);
    out.emplace_back(prefix + "conv2_w", conv2_w);
    out.emplace_back(prefix + "conv2_b", conv2_b);
    out.emplace_back(prefix + "conv3_w", conv3_w);
    out.emplace_back(prefix + "conv3_b", conv3_b);
}

FeatureMap encode_backbone(const Tensor& image, const BackboneParams& params) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("backbone: expected 3 x H x W image, got " + shape_string(image.shape()));
    if (image.dim(1) < 32 || image.dim(2) < 32) throw ShapeError("backbone: image must be at least 32 x 32");
    Tensor x = avg_pool2(leaky_relu(conv2d(image, params.conv1_w, params.conv1_b), kBackboneSlope));
    x = avg_pool2(leaky_relu(conv2d(x, params.conv2_w, params.conv2_b), kBackboneSlope));
    x = avg_pool2(leaky_relu(conv2d(x, params.conv3_w, params.conv3_b), kBackboneSlope));
    return {x, kBackboneStride};
}

RegionSet extract_roi_features(const FeatureMap& fm, const std::vector<Box>& boxes, std::size_t d1, std::size_t d2) {
    RegionSet regions;
    regions.boxes = boxes;
    const std::size_t img_w = fm.width() * fm.stride, img_h = fm.height() * fm.stride;
    for (const auto& box : boxes) {
        validate_box(box, img_w, img_h);
        const auto c = to_feature_cells(box, fm.stride, fm.width(), fm.height());
        regions.features.push_back(adaptive_max_pool(crop(fm.map, c.y0, c.y1, c.x0, c.x1), d1, d2));
    }
    return regions;
}

Tensor project_back(const FeatureMap& fm, const std::vector<Box>& boxes, const std::vector<Tensor>& blocks) {
    if (boxes.size() != blocks.size()) throw ShapeError("project_back: one block per box required");
    const std::size_t H = fm.height(), W = fm.width();
    if (blocks.empty()) return Tensor::zeros({fm.channels(), H, W});
    const std::size_t C = blocks[0].dim(0);
    for (const auto& b : blocks) {
        if (b.rank() != 3 || b.dim(0) != C) throw ShapeError("project_back: blocks must share channel count");
    }

    std::vector<Tensor> resized;
    std::vector<CellBox> cells;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        cells.push_back(to_feature_cells(boxes[k], fm.stride, W, H));
        const auto& c = cells.back();
        resized.push_back(bilinear_upsample(blocks[k], c.y1 - c.y0, c.x1 - c.x0));
    }

    // Scratch starts at -inf so a negative value written by a single box
    // survives; only untouched cells become zero.
    constexpr double kUnset = -std::numeric_limits<double>::infinity();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<double> out(C * H * W, kUnset);
    std::vector<std::size_t> writer(out.size(), kNone);  // block index
    std::vector<std::size_t> source(out.size(), 0);      // flat index within that block
    for (std::size_t k = 0; k < resized.size(); ++k) {
        const auto& c = cells[k];
        const std::size_t bh = c.y1 - c.y0, bw = c.x1 - c.x0;
        auto rv = resized[k].data();
        for (std::size_t ch = 0; ch < C; ++ch)
            for (std::size_t y = 0; y < bh; ++y)
                for (std::size_t x = 0; x < bw; ++x) {
                    const std::size_t o = (ch * H + c.y0 + y) * W + c.x0 + x;
                    const std::size_t s = (ch * bh + y) * bw + x;
                    if (rv[s] > out[o]) {
                        out[o] = rv[s];
                        writer[o] = k;
                        source[o] = s;
                    }
                }
    }
    for (auto& v : out) {
        if (v == kUnset) v = 0.0;
    }

    return record({C, H, W}, std::move(out), resized,
                  [writer, source](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      for (std::size_t o = 0; o < g.size(); ++o) {
                          if (writer[o] == kNone || !gin[writer[o]]) continue;
                          (*gin[writer[o]])[source[o]] += g[o];
                      }
                  });
}

}  // namespace semsal

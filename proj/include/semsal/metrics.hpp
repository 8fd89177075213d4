#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace semsal::metrics {

/// Row-major H x W saliency or density values.
struct Map {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    Map() = default;
    Map(std::size_t w, std::size_t h, std::vector<double> v);
    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    std::size_t size() const { return values.size(); }
};

struct Fixation {
    int x = 0, y = 0;
    bool operator==(const Fixation&) const = default;
};

/// Discrete gaze points on an image of the given extents.
struct FixationSet {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Fixation> points;

    /// Throws std::out_of_range for points outside the image.
    void validate() const;
};

/// Text lines `x,y`.
FixationSet load_fixations(const std::filesystem::path& path, std::size_t width, std::size_t height);
void save_fixations(const std::filesystem::path& path, const FixationSet& fixations);

struct MetricReport {
    double cc = 0, auc = 0, nss = 0, sauc = 0, kl = 0, sim = 0;
};

inline constexpr double kKlEpsilon = 2.2204e-16;
inline constexpr int kShuffledResamples = 10;

/// Mean of the standardized map (population std) at the fixations; 0 for a
/// constant map.
double nss(const Map& map, const FixationSet& fix);

/// Exact Mann-Whitney AUC: saliency at each fixation against every
/// non-fixated pixel, ties credited 0.5. Throws when every pixel is fixated.
double auc_judd(const Map& map, const FixationSet& fix);

/// Shuffled AUC. Negatives are drawn without replacement from the union of
/// other images' fixation locations minus this image's fixated pixels,
/// |fix| per draw, averaged over kShuffledResamples seeded draws.
double sauc(const Map& map, const FixationSet& fix, std::span<const FixationSet> other_fix, std::uint64_t seed);

/// Pearson correlation; 0 if either map is constant.
double cc(const Map& a, const Map& b);

/// sum_i min(a_i, b_i) after normalizing each map to unit sum.
double sim(const Map& a, const Map& b);

/// sum_i gt_i ln(gt_i / (pred_i + eps) + eps) after unit-sum normalization.
double kl(const Map& pred, const Map& gt);

/// Mann-Whitney AUC of positive scores against negative scores.
double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives);

}  // namespace semsal::metrics

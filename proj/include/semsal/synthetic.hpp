#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semsal/config.hpp"
#include "semsal/knowledge.hpp"
#include "semsal/metrics.hpp"
#include "semsal/proposals.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

/// Categories plus the two external sources built from them.
struct KnowledgeBundle {
    std::vector<std::string> categories;
    Taxonomy taxonomy;
    CooccurrenceCorpus corpus;
    ProximityGraph cooccurrence;
    ProximityGraph wup;
};

/// The built-in eight categories, three-level taxonomy and caption-style
/// corpus used when a config names no files.
std::vector<std::string> default_categories();
Taxonomy default_taxonomy();
CooccurrenceCorpus default_corpus();

/// Loads whichever knowledge files the config names and fills in the rest
/// from the defaults, then builds both graphs at the configured thresholds.
KnowledgeBundle load_knowledge(const RunConfig& config);

/// Graphs for the configured source selection, in model source order
/// (co-occurrence first).
std::vector<ProximityGraph> select_graphs(const KnowledgeBundle& knowledge, KnowledgeSources sources);

/// Scale applied to related-category proximity when generating saliency, so
/// the marked object always dominates.
inline constexpr double kRelatedSaliency = 0.75;

/// Category-level proximity that drives label generation: for i != j the
/// largest supra-threshold entry over the sources, scaled by
/// kRelatedSaliency, else 0.
ProximityGraph label_graph(const std::vector<ProximityGraph>& sources);

struct CategorySignature {
    std::array<double, 3> color;
    int pattern;  // 0 solid, 1 horizontal stripes, 2 vertical stripes, 3 checker
};
CategorySignature category_signature(std::size_t index);

struct SceneSpec {
    std::size_t width = 64;
    std::size_t height = 64;
    std::vector<std::string> categories;
    std::size_t min_objects = 3;
    std::size_t max_objects = 8;
    std::size_t fixations = 20;
    double blur_sigma = 1.5;
    ProximityGraph label_graph;
    std::uint64_t seed = 1;
};

SceneSpec scene_spec_from(const RunConfig& config, const KnowledgeBundle& knowledge);

struct SaliencySample {
    Tensor image;    // 3 x H x W in [0,1]
    LabeledBoxes objects;
    std::size_t seed_object = 0;
    metrics::FixationSet fixations;
    Tensor density;  // H x W, sums to 1
};

/// Scenes of 3-8 non-overlapping textured rectangles on noise. One object
/// carries a white border; it receives saliency mass 1 and every other
/// object receives its label-graph proximity to the marked category.
/// Fixations are drawn from the blurred, normalized mass.
std::vector<SaliencySample> generate_dataset(const SceneSpec& spec, std::size_t count);

/// Separable Gaussian blur with zero padding, radius ceil(3 sigma).
std::vector<double> gaussian_blur(const std::vector<double>& image, std::size_t width, std::size_t height, double sigma);

/// Deterministic 80/20-style partition of sample indices.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};
Split split_dataset(std::size_t count, double val_fraction, std::uint64_t seed);

struct Dataset {
    std::vector<std::string> categories;
    std::vector<SaliencySample> samples;
    Split split;
};

/// Directory layout: dataset.txt manifest plus NNNN_{image,density}.gtsr,
/// NNNN_boxes.txt and NNNN_fixations.txt per sample.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

/// Convenience for tests and ablations.
Dataset make_dataset(const RunConfig& config, const KnowledgeBundle& knowledge);

}  // namespace semsal

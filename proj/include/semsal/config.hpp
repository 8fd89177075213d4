#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "semsal/saliency_head.hpp"

namespace semsal {

enum class KnowledgeSources { none, cooccurrence, wup, both };

std::string to_string(KnowledgeSources k);
KnowledgeSources parse_knowledge(const std::string& s);

/// Everything a training, evaluation or ablation run depends on. All
/// randomness derives from `seed` (or each entry of `seeds` for ablations).
struct RunConfig {
    LossWeights weights;
    KnowledgeSources knowledge = KnowledgeSources::both;
    double theta_cooccurrence = 0.3;
    double theta_wup = 0.5;
    bool center_bias = true;
    std::size_t priors = 16;
    std::size_t heads = 8;
    std::size_t channels = 32;
    double lr = 1e-3;
    double lr_decay = 1e-4;
    std::size_t batch_size = 10;
    std::size_t iterations = 200;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds{1, 2, 3};

    // Synthetic scenes.
    std::size_t image_size = 64;
    std::size_t scene_count = 200;
    std::size_t min_objects = 3;
    std::size_t max_objects = 8;
    std::size_t fixations = 20;
    double blur_sigma = 1.5;
    double val_fraction = 0.2;

    // Optional knowledge inputs; built-in defaults when empty.
    std::filesystem::path categories_file;
    std::filesystem::path taxonomy_file;
    std::filesystem::path corpus_file;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace semsal

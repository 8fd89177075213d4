#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semsal/config.hpp"
#include "semsal/knowledge.hpp"
#include "semsal/params.hpp"
#include "semsal/proposals.hpp"
#include "semsal/saliency_head.hpp"
#include "semsal/sgat.hpp"
#include "semsal/spn.hpp"

namespace semsal {

/// Architecture switches that determine the parameter layout.
struct ModelConfig {
    std::size_t channels = kBackboneChannels;
    std::size_t heads = kDefaultHeads;
    bool center_bias = true;
    std::size_t priors = kDefaultPriors;

    bool operator==(const ModelConfig&) const = default;
};

ModelConfig model_config_from(const RunConfig& run);

/// Full saliency network. One SPN/sGAT pair per knowledge graph; with no
/// graphs the knowledge branch is absent and the head sees only m_b (and b).
struct Model {
    ModelConfig config;
    std::vector<ProximityGraph> graphs;
    BackboneParams backbone;
    BaselineParams baseline;
    std::vector<SpnParams> spn;
    std::vector<SgatParams> sgat;
    std::optional<FuseParams> fuse;
    std::optional<PriorParams> priors;
    HeadParams head;

    static Model init(const ModelConfig& config, std::vector<ProximityGraph> graphs, std::uint64_t seed);

    bool has_knowledge() const { return !graphs.empty(); }
    NamedParams parameters() const;
    /// Scalar counts per parameter group (backbone, baseline, spn, sgat,
    /// fuse, priors, head); absent groups report 0.
    std::map<std::string, std::size_t> parameter_counts() const;
};

/// Everything one forward pass produces.
struct ForwardResult {
    Tensor saliency;                       // H x W in (0,1)
    std::vector<PredictedGraph> predicted;  // one per knowledge graph
};

/// Runs the network on a 3 x H x W image with the given region proposals.
ForwardResult forward(const Model& model, const Tensor& image, const std::vector<Box>& boxes);

/// Training objective for one annotated sample. Region labels are required
/// when the model has knowledge graphs and lambda > 0.
struct SampleLoss {
    Tensor total;
    Tensor sal;
    std::vector<Tensor> prox;
};
SampleLoss sample_loss(const Model& model, const ForwardResult& out, const Tensor& density,
                       const std::vector<PixelFixation>& fixations, const std::vector<std::string>& labels,
                       const LossWeights& weights);

/// Rounds every parameter to float32 so a saved checkpoint reloads to the
/// identical in-memory model.
void snap_parameters(Model& model);

/// Directory checkpoint: manifest.txt plus one GTSR1 file per parameter and
/// one GRAPH1 file per knowledge graph.
void save_checkpoint(const std::filesystem::path& dir, const Model& model);
Model load_checkpoint(const std::filesystem::path& dir);

}  // namespace semsal

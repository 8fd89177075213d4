#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "semsal/config.hpp"
#include "semsal/metrics.hpp"
#include "semsal/model.hpp"
#include "semsal/synthetic.hpp"

namespace semsal {

struct LossRecord {
    std::size_t iteration = 0;
    double total = 0, sal = 0, prox = 0, lr = 0;
};

struct TrainResult {
    Model model;
    std::vector<LossRecord> curve;
};

using ProgressFn = std::function<void(const LossRecord&)>;

/// Adam on the mean per-sample objective over mini-batches of the training
/// split, visited in seeded per-epoch permutations. With lambda == 0 the SPN
/// parameters are left out of the optimizer. Parameters are rounded to
/// float32 at the end so the returned model equals its saved checkpoint.
/// Throws NumericError on a non-finite loss.
TrainResult train(const RunConfig& config, const Dataset& data, std::vector<ProximityGraph> graphs,
                  const ProgressFn& progress = {});

/// Same loop starting from an existing model.
std::vector<LossRecord> train_model(Model& model, const RunConfig& config, const Dataset& data,
                                    const ProgressFn& progress = {});

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& curve);

std::vector<PixelFixation> pixel_fixations(const metrics::FixationSet& fixations);

/// Mean total objective over the given samples, without gradients.
double mean_loss(const Model& model, const Dataset& data, const std::vector<std::size_t>& indices,
                 const LossWeights& weights);

/// Predicted H x W saliency for one sample, without gradients.
metrics::Map predict_map(const Model& model, const SaliencySample& sample);

struct EvalRow {
    std::size_t sample = 0;
    metrics::MetricReport report;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    metrics::MetricReport mean;
};

/// All six metrics per sample. sAUC negatives come from the other evaluated
/// samples' fixations, resampled with seed + sample index.
EvalReport evaluate(const Model& model, const Dataset& data, const std::vector<std::size_t>& indices,
                    std::uint64_t seed);
/// Same, scoring an arbitrary map per sample (used for reference maps).
EvalReport evaluate_maps(const std::vector<metrics::Map>& maps, const Dataset& data,
                         const std::vector<std::size_t>& indices, std::uint64_t seed);

void write_eval_csv(std::ostream& out, const EvalReport& report);

struct AblationRow {
    std::string backbone;
    KnowledgeSources knowledge = KnowledgeSources::none;
    std::size_t seeds = 0;
    double cc = 0, auc = 0, nss = 0, sauc = 0;
};

/// Trains and evaluates every knowledge selection over the config's seed
/// list. Each seed regenerates the dataset and the initialization; scores
/// are validation-split means averaged over seeds.
std::vector<AblationRow> ablate(const RunConfig& base, const KnowledgeBundle& knowledge,
                                const std::vector<KnowledgeSources>& selections = {KnowledgeSources::none,
                                                                                  KnowledgeSources::cooccurrence,
                                                                                  KnowledgeSources::wup,
                                                                                  KnowledgeSources::both});

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace semsal

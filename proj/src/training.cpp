#include "semsal/training.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "semsal/ops.hpp"
#include "semsal/optim.hpp"

namespace semsal {

std::vector<PixelFixation> pixel_fixations(const metrics::FixationSet& fixations) {
    std::vector<PixelFixation> out;
    out.reserve(fixations.points.size());
    for (const auto& f : fixations.points) out.push_back({static_cast<std::size_t>(f.x), static_cast<std::size_t>(f.y)});
    return out;
}

namespace {

void check_graphs(const Model& model, const Dataset& data) {
    for (const auto& g : model.graphs) {
        if (g.labels != data.categories) {
            throw std::invalid_argument("knowledge graph labels do not match the dataset categories");
        }
    }
}

std::vector<Tensor> optimized_params(const Model& model, double lambda) {
    std::vector<Tensor> out;
    for (const auto& [name, t] : model.parameters()) {
        // Without the distillation term nothing reaches the SPN.
        if (lambda == 0.0 && name.starts_with("spn")) continue;
        out.push_back(t);
    }
    return out;
}

}  // namespace

std::vector<LossRecord> train_model(Model& model, const RunConfig& config, const Dataset& data,
                                    const ProgressFn& progress) {
    check_graphs(model, data);
    if (data.split.train.empty()) throw std::invalid_argument("train: empty training split");
    Adam adam(optimized_params(model, config.weights.lambda), {config.lr, 0.9, 0.999, 1e-8, config.lr_decay});

    Rng order_rng = Rng(config.seed).fork(7);
    std::vector<std::size_t> order = data.split.train;
    std::size_t cursor = order.size();
    const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

    std::vector<LossRecord> curve;
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        adam.zero_grad();
        LossRecord rec{it, 0, 0, 0, adam.current_lr()};
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            if (cursor == order.size()) {
                for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[order_rng.below(k)]);
                cursor = 0;
            }
            const SaliencySample& s = data.samples[order[cursor++]];
            const ForwardResult out = forward(model, s.image, s.objects.boxes);
            const SampleLoss loss =
                sample_loss(model, out, s.density, pixel_fixations(s.fixations), s.objects.labels, config.weights);
            const double total = loss.total.item();
            if (!std::isfinite(total)) {
                throw NumericError("train: non-finite loss at iteration " + std::to_string(it));
            }
            rec.total += total * inv_batch;
            rec.sal += loss.sal.item() * inv_batch;
            for (const auto& p : loss.prox) rec.prox += p.item() * inv_batch;
            scale(loss.total, inv_batch).backward();
        }
        adam.step();
        curve.push_back(rec);
        if (progress) progress(rec);
    }
    snap_parameters(model);
    return curve;
}

TrainResult train(const RunConfig& config, const Dataset& data, std::vector<ProximityGraph> graphs,
                  const ProgressFn& progress) {
    TrainResult r{Model::init(model_config_from(config), std::move(graphs), config.seed), {}};
    r.curve = train_model(r.model, config, data, progress);
    return r;
}

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& curve) {
    out << "iteration,total,sal,prox,lr\n";
    for (const auto& r : curve) {
        out << r.iteration << "," << format_double(r.total) << "," << format_double(r.sal) << "," << format_double(r.prox)
            << "," << format_double(r.lr) << "\n";
    }
}

double mean_loss(const Model& model, const Dataset& data, const std::vector<std::size_t>& indices,
                 const LossWeights& weights) {
    if (indices.empty()) throw std::invalid_argument("mean_loss: no samples");
    NoGradGuard guard;
    double total = 0;
    for (auto i : indices) {
        const auto& s = data.samples.at(i);
        const ForwardResult out = forward(model, s.image, s.objects.boxes);
        total += sample_loss(model, out, s.density, pixel_fixations(s.fixations), s.objects.labels, weights).total.item();
    }
    return total / static_cast<double>(indices.size());
}

metrics::Map predict_map(const Model& model, const SaliencySample& sample) {
    NoGradGuard guard;
    const Tensor y = forward(model, sample.image, sample.objects.boxes).saliency;
    return metrics::Map(y.dim(1), y.dim(0), std::vector<double>(y.data().begin(), y.data().end()));
}

EvalReport evaluate_maps(const std::vector<metrics::Map>& maps, const Dataset& data,
                         const std::vector<std::size_t>& indices, std::uint64_t seed) {
    if (indices.empty()) throw std::invalid_argument("evaluate: no samples");
    if (maps.size() != indices.size()) throw std::invalid_argument("evaluate: one map per sample required");
    EvalReport report;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& s = data.samples.at(indices[k]);
        const auto& map = maps[k];
        const auto d = s.density.data();
        const metrics::Map gt(s.density.dim(1), s.density.dim(0), std::vector<double>(d.begin(), d.end()));
        if (map.width != gt.width || map.height != gt.height) {
            throw std::invalid_argument("evaluate: prediction extents differ from the sample");
        }
        std::vector<metrics::FixationSet> others;
        for (std::size_t j = 0; j < indices.size(); ++j)
            if (j != k) others.push_back(data.samples[indices[j]].fixations);
        metrics::MetricReport r;
        r.cc = metrics::cc(map, gt);
        r.auc = metrics::auc_judd(map, s.fixations);
        r.nss = metrics::nss(map, s.fixations);
        r.sauc = metrics::sauc(map, s.fixations, others, seed + indices[k]);
        r.kl = metrics::kl(map, gt);
        r.sim = metrics::sim(map, gt);
        report.rows.push_back({indices[k], r});
    }
    const double n = static_cast<double>(report.rows.size());
    for (const auto& row : report.rows) {
        report.mean.cc += row.report.cc / n;
        report.mean.auc += row.report.auc / n;
        report.mean.nss += row.report.nss / n;
        report.mean.sauc += row.report.sauc / n;
        report.mean.kl += row.report.kl / n;
        report.mean.sim += row.report.sim / n;
    }
    return report;
}

EvalReport evaluate(const Model& model, const Dataset& data, const std::vector<std::size_t>& indices,
                    std::uint64_t seed) {
    check_graphs(model, data);
    std::vector<metrics::Map> maps;
    for (auto i : indices) maps.push_back(predict_map(model, data.samples.at(i)));
    return evaluate_maps(maps, data, indices, seed);
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
    auto row = [&](const std::string& label, const metrics::MetricReport& r) {
        out << label << "," << format_double(r.cc) << "," << format_double(r.auc) << "," << format_double(r.nss) << ","
            << format_double(r.sauc) << "," << format_double(r.kl) << "," << format_double(r.sim) << "\n";
    };
    out << "sample,CC,AUC,NSS,sAUC,KL,SIM\n";
    for (const auto& r : report.rows) row(std::to_string(r.sample), r.report);
    row("mean", report.mean);
}

std::vector<AblationRow> ablate(const RunConfig& base, const KnowledgeBundle& knowledge,
                                const std::vector<KnowledgeSources>& selections) {
    std::vector<AblationRow> rows;
    for (auto selection : selections) {
        AblationRow row{"conv3", selection, base.seeds.size()};
        for (auto seed : base.seeds) {
            RunConfig config = base;
            config.seed = seed;
            config.knowledge = selection;
            const Dataset data = make_dataset(config, knowledge);
            const TrainResult trained = train(config, data, select_graphs(knowledge, selection));
            const EvalReport r = evaluate(trained.model, data, data.split.val, seed);
            const double n = static_cast<double>(base.seeds.size());
            row.cc += r.mean.cc / n;
            row.auc += r.mean.auc / n;
            row.nss += r.mean.nss / n;
            row.sauc += r.mean.sauc / n;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    out << "backbone,knowledge,seeds,CC,AUC,NSS,sAUC\n";
    for (const auto& r : rows) {
        out << r.backbone << "," << to_string(r.knowledge) << "," << r.seeds << "," << format_double(r.cc) << ","
            << format_double(r.auc) << "," << format_double(r.nss) << "," << format_double(r.sauc) << "\n";
    }
}

}  // namespace semsal

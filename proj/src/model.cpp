#include "semsal/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "semsal/ops.hpp"
#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal {

ModelConfig model_config_from(const RunConfig& run) {
    return {run.channels, run.heads, run.center_bias, run.center_bias ? run.priors : 0};
}

Model Model::init(const ModelConfig& config, std::vector<ProximityGraph> graphs, std::uint64_t seed) {
    if (config.heads == 0 || config.channels % config.heads != 0) {
        throw std::invalid_argument("model: heads must divide channels");
    }
    if (config.center_bias && config.priors == 0) throw std::invalid_argument("model: center bias needs prior maps");
    for (std::size_t l = 1; l < graphs.size(); ++l) {
        if (graphs[l].labels != graphs[0].labels) throw std::invalid_argument("model: knowledge graphs disagree on labels");
    }
    // Separate streams per group so configurations that share a component
    // also share its initial values.
    Rng root(seed);
    Rng backbone_rng = root.fork(1), baseline_rng = root.fork(2), spn_rng = root.fork(3), sgat_rng = root.fork(4),
        prior_rng = root.fork(5), head_rng = root.fork(6);

    Model m;
    m.config = config;
    m.graphs = std::move(graphs);
    const std::size_t C = config.channels;
    m.backbone = BackboneParams::init(backbone_rng, C);
    m.baseline = BaselineParams::init(baseline_rng, C);
    for (std::size_t l = 0; l < m.graphs.size(); ++l) {
        m.spn.push_back(SpnParams::init(spn_rng, C));
        m.sgat.push_back(SgatParams::init(sgat_rng, C, config.heads));
    }
    if (m.has_knowledge()) m.fuse = FuseParams::identity(C, m.graphs.size());
    if (config.center_bias) m.priors = PriorParams::init(prior_rng, config.priors);
    const std::size_t head_in = (m.has_knowledge() ? C : 0) + C + (config.center_bias ? config.priors : 0);
    m.head = HeadParams::init(head_rng, head_in);
    return m;
}

NamedParams Model::parameters() const {
    NamedParams out;
    backbone.collect("backbone.", out);
    baseline.collect("baseline.", out);
    for (std::size_t l = 0; l < spn.size(); ++l) spn[l].collect("spn" + std::to_string(l) + ".", out);
    for (std::size_t l = 0; l < sgat.size(); ++l) sgat[l].collect("sgat" + std::to_string(l) + ".", out);
    if (fuse) fuse->collect("fuse.", out);
    if (priors) priors->collect("priors.", out);
    head.collect("head.", out);
    return out;
}

std::map<std::string, std::size_t> Model::parameter_counts() const {
    std::map<std::string, std::size_t> counts{{"backbone", 0}, {"baseline", 0}, {"spn", 0}, {"sgat", 0},
                                              {"fuse", 0},     {"priors", 0},   {"head", 0}};
    for (const auto& [name, t] : parameters()) {
        std::string group = name.substr(0, name.find('.'));
        while (!group.empty() && std::isdigit(static_cast<unsigned char>(group.back()))) group.pop_back();
        counts[group] += t.numel();
    }
    return counts;
}

ForwardResult forward(const Model& model, const Tensor& image, const std::vector<Box>& boxes) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("forward: image must be 3 x H x W");
    const std::size_t H = image.dim(1), W = image.dim(2);
    for (const auto& b : boxes) validate_box(b, W, H);

    const FeatureMap fm = encode_backbone(image, model.backbone);
    ForwardResult out;
    Tensor m_e;
    if (model.has_knowledge() && !boxes.empty()) {
        const RegionSet regions = extract_roi_features(fm, boxes);
        std::vector<std::vector<Tensor>> updates;
        for (std::size_t l = 0; l < model.graphs.size(); ++l) {
            out.predicted.push_back(predict_graph(model.spn[l], regions.features, model.graphs[l].theta));
            updates.push_back(sgat_forward(model.sgat[l], regions.features, out.predicted.back()).blocks);
        }
        m_e = project_back(fm, boxes, fuse_updates(*model.fuse, updates));
    } else if (model.has_knowledge()) {
        m_e = Tensor::zeros({model.config.channels, fm.height(), fm.width()});
    }
    const Tensor m_b = baseline_features(model.baseline, fm.map);
    Tensor b;
    if (model.priors) b = prior_maps(*model.priors, fm.height(), fm.width());
    out.saliency = predict(model.head, m_e, m_b, b, H, W);
    return out;
}

SampleLoss sample_loss(const Model& model, const ForwardResult& out, const Tensor& density,
                       const std::vector<PixelFixation>& fixations, const std::vector<std::string>& labels,
                       const LossWeights& weights) {
    // The head emits per-pixel values in (0,1), so the L1 target is the
    // density rescaled to a unit peak.
    const auto d = density.data();
    const double peak = *std::max_element(d.begin(), d.end());
    if (!(peak > 0)) throw std::invalid_argument("sample_loss: density has no positive mass");
    const Tensor target = scale(density.detach(), 1.0 / peak);

    SampleLoss loss;
    loss.sal = loss_sal(out.saliency, target, fixations, weights);
    if (weights.lambda != 0.0) {
        for (std::size_t l = 0; l < out.predicted.size(); ++l) {
            loss.prox.push_back(prox_loss(out.predicted[l], model.graphs[l], labels));
        }
    }
    loss.total = loss_total(loss.sal, loss.prox, weights.lambda);
    return loss;
}

void snap_parameters(Model& model) {
    for (auto& [_, t] : model.parameters()) {
        Tensor handle = t;
        snap_to_f32(handle);
    }
}

namespace {

constexpr const char* kCheckpointMagic = "SALCKPT1";

std::string param_file(const std::string& name) { return name + ".gtsr"; }

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Model& model) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw FormatError("cannot write " + (dir / "manifest.txt").string());
    manifest << kCheckpointMagic << "\n"
             << "channels=" << model.config.channels << "\n"
             << "heads=" << model.config.heads << "\n"
             << "center_bias=" << (model.config.center_bias ? 1 : 0) << "\n"
             << "priors=" << model.config.priors << "\n";
    for (std::size_t l = 0; l < model.graphs.size(); ++l) {
        const std::string file = "graph" + std::to_string(l) + ".txt";
        save_graph(dir / file, model.graphs[l]);
        manifest << "graph=" << file << "\n";
    }
    for (const auto& [name, t] : model.parameters()) {
        save_gtsr(dir / param_file(name), t);
        manifest << "param=" << name << "\n";
    }
}

Model load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw FormatError("cannot open checkpoint manifest " + (dir / "manifest.txt").string());
    std::string line;
    if (!std::getline(manifest, line) || text::trim(line) != kCheckpointMagic) {
        throw FormatError("checkpoint: missing " + std::string(kCheckpointMagic) + " header");
    }
    ModelConfig config;
    std::vector<ProximityGraph> graphs;
    std::vector<std::string> names;
    while (std::getline(manifest, line)) {
        const auto t = text::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw FormatError("checkpoint: malformed manifest line");
        const std::string key(t.substr(0, eq)), value(t.substr(eq + 1));
        if (key == "channels") config.channels = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "heads") config.heads = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "center_bias") config.center_bias = text::parse_long(value, key) != 0;
        else if (key == "priors") config.priors = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "graph") graphs.push_back(load_graph(dir / value));
        else if (key == "param") names.push_back(value);
        else throw FormatError("checkpoint: unknown manifest key '" + key + "'");
    }

    Model model;
    try {
        model = Model::init(config, std::move(graphs), 0);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    const NamedParams params = model.parameters();
    if (params.size() != names.size()) throw FormatError("checkpoint: parameter list does not match the architecture");
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& [name, dst] = params[k];
        if (names[k] != name) throw FormatError("checkpoint: expected parameter '" + name + "', found '" + names[k] + "'");
        const Tensor src = load_gtsr(dir / param_file(name));
        if (src.shape() != dst.shape()) {
            throw FormatError("checkpoint: parameter '" + name + "' has shape " + shape_string(src.shape()) +
                              ", expected " + shape_string(dst.shape()));
        }
        Tensor handle = dst;
        std::ranges::copy(src.data(), handle.mutable_data().begin());
    }
    return model;
}

}  // namespace semsal

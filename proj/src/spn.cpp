#include "semsal/spn.hpp"

#include "semsal/ops.hpp"

namespace semsal {

SpnParams SpnParams::init(Rng& rng, std::size_t channels) {
    SpnParams p;
    std::size_t in = 2 * channels;
    for (std::size_t width : {kHidden[0], kHidden[1], kHidden[2], std::size_t{1}}) {
        p.weights.push_back(he_param({in, width}, in, rng));
        p.biases.push_back(zero_param({width}));
        in = width;
    }
    return p;
}

SpnParams SpnParams::zeros(std::size_t channels) {
    SpnParams p;
    std::size_t in = 2 * channels;
    for (std::size_t width : {kHidden[0], kHidden[1], kHidden[2], std::size_t{1}}) {
        p.weights.push_back(zero_param({in, width}));
        p.biases.push_back(zero_param({width}));
        in = width;
    }
    return p;
}

void SpnParams::collect(const std::string& prefix, NamedParams& out) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(prefix + "fc" + std::to_string(l + 1) + "_w", weights[l]);
        out.emplace_back(prefix + "fc" + std::to_string(l + 1) + "_b", biases[l]);
    }
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t p) {
    // Rows 0..i-1 contribute (p-1) + (p-2) + ... + (p-i) entries.
    return i * p - i * (i + 1) / 2 + (j - i - 1);
}

std::vector<std::vector<std::size_t>> threshold_neighbors(const std::vector<double>& scores, std::size_t p,
                                                          double theta) {
    std::vector<std::vector<std::size_t>> n(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i == j || scores[i * p + j] > theta) n[i].push_back(j);
    return n;
}

namespace {

Tensor mlp(const SpnParams& params, Tensor x) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        x = linear(x, params.weights[l], params.biases[l]);
        x = l + 1 < params.weights.size() ? leaky_relu(x, SpnParams::kSlope) : sigmoid(x);
    }
    return x;
}

// Symmetrized upper-triangle scores for all pairs of the given blocks.
Tensor score_pairs(const SpnParams& params, const std::vector<Tensor>& features) {
    const std::size_t p = features.size();
    std::vector<Tensor> descriptors;
    for (const auto& h : features) descriptors.push_back(global_avg_pool(h));
    const std::size_t C = descriptors[0].numel();
    if (2 * C != params.input_width()) {
        throw ShapeError("SPN: descriptor width " + std::to_string(C) + " does not match MLP input " +
                         std::to_string(params.input_width()));
    }
    for (const auto& d : descriptors) {
        if (d.numel() != C) throw ShapeError("SPN: feature blocks differ in channel count");
    }
    const Tensor flat = concat(descriptors);

    // Ordered pairs (i, j), i != j, one MLP row each.
    std::vector<std::size_t> gather_idx;
    std::vector<std::size_t> ordered(p * p, 0);
    std::size_t row = 0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j) continue;
            ordered[i * p + j] = row++;
            for (std::size_t c = 0; c < C; ++c) gather_idx.push_back(i * C + c);
            for (std::size_t c = 0; c < C; ++c) gather_idx.push_back(j * C + c);
        }
    const Tensor raw = mlp(params, reshape(gather(flat, gather_idx), {row, 2 * C}));

    std::vector<std::size_t> forward_idx, reverse_idx;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            forward_idx.push_back(ordered[i * p + j]);
            reverse_idx.push_back(ordered[j * p + i]);
        }
    return scale(add(gather(raw, forward_idx), gather(raw, reverse_idx)), 0.5);
}

}  // namespace

Tensor spn_edge(const SpnParams& params, const Tensor& h_i, const Tensor& h_j) {
    if (h_i.shape() != h_j.shape()) throw ShapeError("spn_edge: feature blocks differ in shape");
    return score_pairs(params, {h_i, h_j});
}

PredictedGraph predict_graph(const SpnParams& params, const std::vector<Tensor>& features, double theta) {
    const std::size_t p = features.size();
    if (p == 0) throw ShapeError("predict_graph: no regions");
    PredictedGraph g;
    g.regions = p;
    g.scores.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) g.scores[i * p + i] = 1.0;
    if (p > 1) {
        g.pair_scores = score_pairs(params, features);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j)
                g.scores[i * p + j] = g.scores[j * p + i] = g.pair_scores[pair_index(i, j, p)];
    }
    g.neighbors = threshold_neighbors(g.scores, p, theta);
    return g;
}

Tensor prox_loss(const PredictedGraph& pred, const ProximityGraph& external, const std::vector<std::string>& labels) {
    const std::size_t p = pred.regions;
    if (labels.size() != p) throw std::invalid_argument("prox_loss: one label per region required");
    std::vector<std::size_t> cls;
    for (const auto& l : labels) cls.push_back(external.index_of(l));
    if (p < 2) return Tensor::scalar(0.0);
    std::vector<double> target;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) target.push_back(external.at(cls[i], cls[j]));
    const std::size_t n = target.size();
    const Tensor t({n}, std::move(target));
    return sum(square(sub(pred.pair_scores, t)));
}

}  // namespace semsal

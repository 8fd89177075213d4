#include "semsal/sgat.hpp"

#include "semsal/ops.hpp"

namespace semsal {

SgatParams SgatParams::init(Rng& rng, std::size_t channels, std::size_t heads) {
    if (heads == 0 || channels % heads != 0) {
        throw std::invalid_argument("sGAT: head count must divide the channel count");
    }
    const std::size_t per_head = channels / heads;
    SgatParams p;
    for (std::size_t k = 0; k < heads; ++k) {
        p.filters.push_back(he_param({per_head, channels, 3, 3}, channels * 9, rng));
        p.attention.push_back(normal_param({2 * per_head}, 1.0 / std::sqrt(static_cast<double>(per_head)), rng));
    }
    return p;
}

void SgatParams::collect(const std::string& prefix, NamedParams& out) const {
    for (std::size_t k = 0; k < heads(); ++k) {
        out.emplace_back(prefix + "head" + std::to_string(k) + "_w", filters[k]);
        out.emplace_back(prefix + "head" + std::to_string(k) + "_a", attention[k]);
    }
}

namespace {

// Splits a_k into the halves applied to the target and the neighbour.
std::pair<Tensor, Tensor> attention_halves(const SgatParams& params, std::size_t head) {
    const std::size_t c = params.head_channels();
    const std::size_t sizes[2] = {c, c};
    auto halves = split(params.attention[head], sizes);
    return {reshape(halves[0], {c, 1}), reshape(halves[1], {c, 1})};
}

}  // namespace

Tensor attention_coeff(const SgatParams& params, std::size_t head, const Tensor& h_i, const Tensor& h_j) {
    if (head >= params.heads()) throw std::out_of_range("attention_coeff: head index");
    if (h_i.shape() != h_j.shape()) throw ShapeError("attention_coeff: blocks differ in shape");
    const std::size_t c = params.head_channels();
    const auto [a_self, a_other] = attention_halves(params, head);
    const Tensor u = reshape(global_avg_pool(conv2d(h_i, params.filters[head])), {1, c});
    const Tensor v = reshape(global_avg_pool(conv2d(h_j, params.filters[head])), {1, c});
    return reshape(leaky_relu(add(matmul(u, a_self), matmul(v, a_other)), kAttentionSlope), {1});
}

SgatOutput sgat_forward(const SgatParams& params, const std::vector<Tensor>& features, const PredictedGraph& graph) {
    const std::size_t p = features.size();
    if (graph.regions != p || graph.neighbors.size() != p) throw ShapeError("sGAT: graph and region count differ");
    const std::size_t K = params.heads(), c = params.head_channels();

    SgatOutput out;
    out.attention.resize(K);
    std::vector<std::vector<Tensor>> head_blocks(p);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<Tensor> z;
        std::vector<Tensor> pooled;
        for (const auto& h : features) {
            z.push_back(conv2d(h, params.filters[k]));
            pooled.push_back(global_avg_pool(z.back()));
        }
        const Tensor U = reshape(concat(pooled), {p, c});
        const auto [a_self, a_other] = attention_halves(params, k);
        const Tensor s = matmul(U, a_self);   // p x 1
        const Tensor t = matmul(U, a_other);  // p x 1

        for (std::size_t i = 0; i < p; ++i) {
            const auto& nbrs = graph.neighbors[i];
            if (nbrs.empty()) throw std::logic_error("sGAT: empty neighbourhood");
            const std::size_t self[1] = {i};
            const Tensor logits = leaky_relu(add(gather(s, self), gather(t, nbrs)), kAttentionSlope);
            const Tensor alpha = softmax(logits);
            std::vector<Tensor> items;
            for (auto j : nbrs) items.push_back(z[j]);
            head_blocks[i].push_back(leaky_relu(weighted_sum(alpha, items), kUpdateSlope));
            out.attention[k].push_back(alpha);
        }
    }
    for (std::size_t i = 0; i < p; ++i) out.blocks.push_back(K == 1 ? head_blocks[i][0] : concat(head_blocks[i]));
    return out;
}

FuseParams FuseParams::init(Rng& rng, std::size_t channels, std::size_t sources) {
    return {he_param({channels, channels * sources, 1, 1}, channels * sources, rng), zero_param({channels})};
}

FuseParams FuseParams::identity(std::size_t channels, std::size_t sources) {
    FuseParams f{zero_param({channels, channels * sources, 1, 1}), zero_param({channels})};
    auto w = f.weight.mutable_data();
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t l = 0; l < sources; ++l) w[c * channels * sources + l * channels + c] = 1.0 / static_cast<double>(sources);
    return f;
}

void FuseParams::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + "w", weight);
    out.emplace_back(prefix + "b", bias);
}

std::vector<Tensor> fuse_updates(const FuseParams& params, const std::vector<std::vector<Tensor>>& sets) {
    if (sets.empty()) throw std::invalid_argument("fuse_updates: no sources");
    if (sets.size() != params.sources()) throw ShapeError("fuse_updates: source count does not match fusion weights");
    const std::size_t p = sets[0].size();
    for (const auto& s : sets) {
        if (s.size() != p) throw ShapeError("fuse_updates: sources disagree on region count");
    }
    std::vector<Tensor> fused;
    for (std::size_t i = 0; i < p; ++i) {
        std::vector<Tensor> parts;
        for (const auto& s : sets) parts.push_back(s[i]);
        fused.push_back(conv2d(concat(parts), params.weight, params.bias));
    }
    return fused;
}

}  // namespace semsal

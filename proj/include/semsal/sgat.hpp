#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "semsal/params.hpp"
#include "semsal/random.hpp"
#include "semsal/spn.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

inline constexpr std::size_t kDefaultHeads = 8;
inline constexpr double kAttentionSlope = 0.2;
inline constexpr double kUpdateSlope = 0.01;

/// One spatial graph-attention layer. Head k owns a 3x3 filter bank
/// W_k (C/K x C x 3 x 3) and an attention vector a_k (2C/K).
struct SgatParams {
    std::vector<Tensor> filters;
    std::vector<Tensor> attention;

    static SgatParams init(Rng& rng, std::size_t channels, std::size_t heads = kDefaultHeads);
    std::size_t heads() const { return filters.size(); }
    std::size_t head_channels() const { return filters.front().dim(0); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// c_ij = leaky_relu(a_k . (pool(W_k * h_i) || pool(W_k * h_j)), 0.2).
Tensor attention_coeff(const SgatParams& params, std::size_t head, const Tensor& h_i, const Tensor& h_j);

/// Per-head attention rows alpha_i over N_i, alongside the updated blocks.
struct SgatOutput {
    std::vector<Tensor> blocks;                        // p blocks, C x d1 x d2
    std::vector<std::vector<Tensor>> attention;        // [head][i] -> weights over graph.neighbors[i]
};

/// Propagates every block along the graph:
/// h'_i = ||_k leaky_relu(sum_{j in N_i} alpha_ij^k W_k * h_j, 0.01).
SgatOutput sgat_forward(const SgatParams& params, const std::vector<Tensor>& features, const PredictedGraph& graph);

/// 1x1 convolution fusing N per-source updates (N*C channels) back to C.
struct FuseParams {
    Tensor weight;  // C x N*C x 1 x 1
    Tensor bias;    // C

    static FuseParams init(Rng& rng, std::size_t channels, std::size_t sources);
    /// W[c][l*C + c] = 1/N, zero bias: the mean of the sources.
    static FuseParams identity(std::size_t channels, std::size_t sources);
    std::size_t sources() const { return weight.dim(1) / weight.dim(0); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// sets[l][i] is region i's update from source l.
std::vector<Tensor> fuse_updates(const FuseParams& params, const std::vector<std::vector<Tensor>>& sets);

}  // namespace semsal

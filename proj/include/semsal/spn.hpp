#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "semsal/knowledge.hpp"
#include "semsal/params.hpp"
#include "semsal/random.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

/// Four-layer MLP scoring a pair of pooled region descriptors:
/// 2C -> 128 -> 64 -> 32 -> 1, leaky ReLU between layers, sigmoid head.
struct SpnParams {
    std::vector<Tensor> weights;  // [in x out] per layer
    std::vector<Tensor> biases;

    static constexpr std::size_t kHidden[3] = {128, 64, 32};
    static constexpr double kSlope = 0.01;

    static SpnParams init(Rng& rng, std::size_t channels);
    /// All weights and biases zero; scores every pair at exactly 0.5.
    static SpnParams zeros(std::size_t channels);
    std::size_t input_width() const { return weights.front().dim(0); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// Index of unordered pair (i, j), i < j, in row-major upper-triangle order.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t p);

/// Predicted region-to-region proximity.
struct PredictedGraph {
    std::size_t regions = 0;
    Tensor pair_scores;                               // p(p-1)/2 symmetrized scores; undefined when p == 1
    std::vector<double> scores;                       // p x p values, unit diagonal
    std::vector<std::vector<std::size_t>> neighbors;  // N_i, always containing i, ascending

    double score(std::size_t i, std::size_t j) const { return scores[i * regions + j]; }
};

/// N_i = {i} union {j : score(i,j) > theta}.
std::vector<std::vector<std::size_t>> threshold_neighbors(const std::vector<double>& scores, std::size_t p,
                                                          double theta);

/// Symmetrized score 0.5 * (mlp(h_i || h_j) + mlp(h_j || h_i)) in [0,1].
Tensor spn_edge(const SpnParams& params, const Tensor& h_i, const Tensor& h_j);

/// Scores all region pairs and thresholds them at theta.
PredictedGraph predict_graph(const SpnParams& params, const std::vector<Tensor>& features, double theta);

/// Distillation loss sum_{i<j} (e_hat_ij - e_{class(i) class(j)})^2 against the
/// external category graph. Same-class pairs target the unit diagonal.
Tensor prox_loss(const PredictedGraph& pred, const ProximityGraph& external, const std::vector<std::string>& labels);

}  // namespace semsal

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "semsal/random.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

/// Ordered (name, tensor) list used for optimizers and checkpoints.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

inline std::vector<Tensor> tensors_of(const NamedParams& named) {
    std::vector<Tensor> out;
    out.reserve(named.size());
    for (const auto& [_, t] : named) out.push_back(t);
    return out;
}

inline std::size_t count_scalars(const NamedParams& named) {
    std::size_t n = 0;
    for (const auto& [_, t] : named) n += t.numel();
    return n;
}

/// Trainable tensor filled with N(0, stddev^2).
inline Tensor normal_param(Shape shape, double stddev, Rng& rng) {
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = rng.normal(0.0, stddev);
    return Tensor(std::move(shape), std::move(data), true);
}

/// He initialization for a layer with the given fan-in.
inline Tensor he_param(Shape shape, std::size_t fan_in, Rng& rng) {
    return normal_param(std::move(shape), std::sqrt(2.0 / static_cast<double>(fan_in)), rng);
}

inline Tensor zero_param(Shape shape) { return Tensor::zeros(std::move(shape), true); }

}  // namespace semsal

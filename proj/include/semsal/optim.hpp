#pragma once

#include <cstdint>
#include <vector>

#include "semsal/tensor.hpp"

namespace semsal {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double decay = 1e-4;  // lr_t = lr / (1 + decay * t)
};

/// Adaptive-moment optimizer with bias correction and inverse-time
/// learning-rate decay.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamOptions options = {});

    /// Applies one update from the current gradients. Throws if a parameter
    /// carries no gradient buffer.
    void step();
    void zero_grad();

    std::uint64_t steps() const { return step_; }
    double current_lr() const;
    const AdamOptions& options() const { return options_; }
    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }

private:
    std::vector<Tensor> params_;
    AdamOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t step_ = 0;
};

}  // namespace semsal

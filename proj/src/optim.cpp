#include "semsal/optim.hpp"

#include <cmath>

namespace semsal {

Adam::Adam(std::vector<Tensor> params, AdamOptions options) : params_(std::move(params)), options_(options) {
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

double Adam::current_lr() const { return options_.lr / (1.0 + options_.decay * static_cast<double>(step_)); }

void Adam::step() {
    for (const auto& p : params_) {
        if (!p.requires_grad() || p.grad().size() != p.numel()) {
            throw std::logic_error("Adam::step: parameter " + shape_string(p.shape()) + " has no gradient");
        }
    }
    const double lr = current_lr();
    ++step_;
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(options_.beta1, t);
    const double bc2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto data = params_[k].mutable_data();
        auto grad = params_[k].grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < data.size(); ++i) {
            m[i] = options_.beta1 * m[i] + (1 - options_.beta1) * grad[i];
            v[i] = options_.beta2 * v[i] + (1 - options_.beta2) * grad[i] * grad[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            data[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace semsal

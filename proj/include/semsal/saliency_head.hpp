#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "semsal/params.hpp"
#include "semsal/random.hpp"
#include "semsal/tensor.hpp"

namespace semsal {

inline constexpr std::size_t kDefaultPriors = 16;
inline constexpr std::size_t kHeadHidden = 16;

/// R learnable Gaussians over normalized [0,1]^2 image coordinates. Stored
/// as R x 4 rows (mu_x, mu_y, rho_x, rho_y) with sigma = softplus(rho).
struct PriorParams {
    Tensor raw;

    static PriorParams init(Rng& rng, std::size_t count = kDefaultPriors);
    static PriorParams from(const std::vector<double>& mu_x, const std::vector<double>& mu_y,
                            const std::vector<double>& sigma_x, const std::vector<double>& sigma_y);
    std::size_t count() const { return raw.dim(0); }
    double mu_x(std::size_t r) const { return raw[r * 4]; }
    double mu_y(std::size_t r) const { return raw[r * 4 + 1]; }
    double sigma_x(std::size_t r) const;
    double sigma_y(std::size_t r) const;
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// Unnormalized-grid Gaussian density 1/(2 pi sx sy) exp(-(dx^2/2sx^2 + dy^2/2sy^2)).
double gaussian_prior_value(double x, double y, double mu_x, double mu_y, double sigma_x, double sigma_y);

/// R x H x W maps sampled at cell centres ((col + 0.5)/W, (row + 0.5)/H).
Tensor prior_maps(const PriorParams& params, std::size_t height, std::size_t width);

/// Baseline branch: m_b = leaky_relu(conv3x3(m_r)).
struct BaselineParams {
    Tensor weight, bias;

    static BaselineParams init(Rng& rng, std::size_t channels);
    void collect(const std::string& prefix, NamedParams& out) const;
};
Tensor baseline_features(const BaselineParams& params, const Tensor& raw_map);

/// f_end: conv3x3 (in -> 16), leaky ReLU, conv3x3 (16 -> 1), bilinear
/// upsample to the image, sigmoid.
struct HeadParams {
    Tensor conv1_w, conv1_b, conv2_w, conv2_b;

    static HeadParams init(Rng& rng, std::size_t in_channels);
    std::size_t in_channels() const { return conv1_w.dim(1); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

/// Concatenates whichever of m_e, m_b, b are defined (in that order) and
/// returns the H x W saliency map in (0,1).
Tensor predict(const HeadParams& head, const Tensor& m_e, const Tensor& m_b, const Tensor& priors,
               std::size_t height, std::size_t width);

struct LossWeights {
    double beta = 0.3;
    double gamma = 0.15;
    double lambda = 0.8;
};

/// Row-major pixel indices of fixations on a map `width` pixels wide.
struct PixelFixation {
    std::size_t x = 0, y = 0;
};

/// Differentiable Pearson correlation of two equally sized maps; zero when
/// either map is constant.
Tensor cc_term(const Tensor& pred, const Tensor& target);
/// Differentiable mean standardized prediction at the fixated pixels; zero
/// when the prediction is constant.
Tensor nss_term(const Tensor& pred, const std::vector<PixelFixation>& fixations);

/// L1(y_hat, y) - beta CC(y_hat, y) - gamma NSS(y_hat, fixations).
Tensor loss_sal(const Tensor& pred, const Tensor& target, const std::vector<PixelFixation>& fixations,
                const LossWeights& weights);

/// L_sal + lambda * sum_l L_prox,l.
Tensor loss_total(const Tensor& sal, const std::vector<Tensor>& prox, double lambda);

}  // namespace semsal

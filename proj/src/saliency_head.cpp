#include "semsal/saliency_head.hpp"

#include <cmath>
#include <numbers>

#include "semsal/ops.hpp"

namespace semsal {

namespace {

constexpr double kHeadSlope = 0.01;
// Below this population standard deviation a map counts as constant.
constexpr double kDegenerateStd = 1e-12;

double softplus_inverse(double y) { return std::log(std::expm1(y)); }
double softplus_value(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

PriorParams PriorParams::init(Rng& rng, std::size_t count) {
    std::vector<double> mx, my, sx, sy;
    for (std::size_t r = 0; r < count; ++r) {
        mx.push_back(rng.uniform(0.35, 0.65));
        my.push_back(rng.uniform(0.35, 0.65));
        sx.push_back(0.2);
        sy.push_back(0.2);
    }
    return from(mx, my, sx, sy);
}

PriorParams PriorParams::from(const std::vector<double>& mu_x, const std::vector<double>& mu_y,
                              const std::vector<double>& sigma_x, const std::vector<double>& sigma_y) {
    const std::size_t R = mu_x.size();
    if (R == 0 || mu_y.size() != R || sigma_x.size() != R || sigma_y.size() != R) {
        throw std::invalid_argument("PriorParams: parameter lists must be non-empty and equally long");
    }
    std::vector<double> raw;
    for (std::size_t r = 0; r < R; ++r) {
        if (!(sigma_x[r] > 0 && sigma_y[r] > 0)) throw std::invalid_argument("PriorParams: sigma must be positive");
        raw.insert(raw.end(), {mu_x[r], mu_y[r], softplus_inverse(sigma_x[r]), softplus_inverse(sigma_y[r])});
    }
    return {Tensor({R, 4}, std::move(raw), true)};
}

double PriorParams::sigma_x(std::size_t r) const { return softplus_value(raw[r * 4 + 2]); }
double PriorParams::sigma_y(std::size_t r) const { return softplus_value(raw[r * 4 + 3]); }

void PriorParams::collect(const std::string& prefix, NamedParams& out) const { out.emplace_back(prefix + "gaussians", raw); }

double gaussian_prior_value(double x, double y, double mu_x, double mu_y, double sigma_x, double sigma_y) {
    const double dx = x - mu_x, dy = y - mu_y;
    return std::exp(-(dx * dx / (2 * sigma_x * sigma_x) + dy * dy / (2 * sigma_y * sigma_y))) /
           (2 * std::numbers::pi * sigma_x * sigma_y);
}

Tensor prior_maps(const PriorParams& params, std::size_t height, std::size_t width) {
    if (height == 0 || width == 0) throw ShapeError("prior_maps: extents must be positive");
    const std::size_t R = params.count();
    const std::size_t HW = height * width;
    std::vector<double> out(R * HW);
    for (std::size_t r = 0; r < R; ++r) {
        const double mx = params.mu_x(r), my = params.mu_y(r), sx = params.sigma_x(r), sy = params.sigma_y(r);
        for (std::size_t i = 0; i < height; ++i) {
            const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(height);
            for (std::size_t j = 0; j < width; ++j) {
                const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(width);
                out[r * HW + i * width + j] = gaussian_prior_value(x, y, mx, my, sx, sy);
            }
        }
    }
    std::vector<double> values = out;
    const Tensor raw = params.raw;
    return record({R, height, width}, std::move(out), {raw},
                  [raw, values, R, height, width](std::span<const double> g, std::span<std::vector<double>*> gin) {
                      auto& gr = *gin[0];
                      const std::size_t HW = height * width;
                      for (std::size_t r = 0; r < R; ++r) {
                          const double mx = raw[r * 4], my = raw[r * 4 + 1];
                          const double sx = softplus_value(raw[r * 4 + 2]), sy = softplus_value(raw[r * 4 + 3]);
                          double d_mx = 0, d_my = 0, d_sx = 0, d_sy = 0;
                          for (std::size_t i = 0; i < height; ++i) {
                              const double dy = (static_cast<double>(i) + 0.5) / static_cast<double>(height) - my;
                              for (std::size_t j = 0; j < width; ++j) {
                                  const double dx = (static_cast<double>(j) + 0.5) / static_cast<double>(width) - mx;
                                  const double gf = g[r * HW + i * width + j] * values[r * HW + i * width + j];
                                  d_mx += gf * dx / (sx * sx);
                                  d_my += gf * dy / (sy * sy);
                                  d_sx += gf * (dx * dx / (sx * sx * sx) - 1.0 / sx);
                                  d_sy += gf * (dy * dy / (sy * sy * sy) - 1.0 / sy);
                              }
                          }
                          gr[r * 4] += d_mx;
                          gr[r * 4 + 1] += d_my;
                          gr[r * 4 + 2] += d_sx * logistic(raw[r * 4 + 2]);
                          gr[r * 4 + 3] += d_sy * logistic(raw[r * 4 + 3]);
                      }
                  });
}

BaselineParams BaselineParams::init(Rng& rng, std::size_t channels) {
    return {he_param({channels, channels, 3, 3}, channels * 9, rng), zero_param({channels})};
}

void BaselineParams::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + "w", weight);
    out.emplace_back(prefix + "b", bias);
}

Tensor baseline_features(const BaselineParams& params, const Tensor& raw_map) {
    return leaky_relu(conv2d(raw_map, params.weight, params.bias), kHeadSlope);
}

HeadParams HeadParams::init(Rng& rng, std::size_t in_channels) {
    HeadParams h;
    h.conv1_w = he_param({kHeadHidden, in_channels, 3, 3}, in_channels * 9, rng);
    h.conv1_b = zero_param({kHeadHidden});
    h.conv2_w = normal_param({1, kHeadHidden, 3, 3}, std::sqrt(1.0 / (kHeadHidden * 9.0)), rng);
    h.conv2_b = zero_param({1});
    return h;
}

void HeadParams::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + "conv1_w", conv1_w);
    out.emplace_back(prefix + "conv1_b", conv1_b);
    out.emplace_back(prefix + "conv2_w", conv2_w);
    out.emplace_back(prefix + "conv2_b", conv2_b);
}

Tensor predict(const HeadParams& head, const Tensor& m_e, const Tensor& m_b, const Tensor& priors, std::size_t height,
               std::size_t width) {
    std::vector<Tensor> parts;
    for (const Tensor* t : {&m_e, &m_b, &priors}) {
        if (!t->defined()) continue;
        if (t->rank() != 3) throw ShapeError("predict: inputs must be C x H' x W'");
        if (!parts.empty() && (t->dim(1) != parts[0].dim(1) || t->dim(2) != parts[0].dim(2))) {
            throw ShapeError("predict: spatial extents of head inputs differ");
        }
        parts.push_back(*t);
    }
    if (parts.empty()) throw std::invalid_argument("predict: no inputs");
    const Tensor x = parts.size() == 1 ? parts[0] : concat(parts);
    if (x.dim(0) != head.in_channels()) {
        throw ShapeError("predict: head expects " + std::to_string(head.in_channels()) + " channels, got " +
                         std::to_string(x.dim(0)));
    }
    Tensor y = leaky_relu(conv2d(x, head.conv1_w, head.conv1_b), kHeadSlope);
    y = conv2d(y, head.conv2_w, head.conv2_b);
    y = sigmoid(bilinear_upsample(y, height, width));
    return reshape(y, {height, width});
}

namespace {

double population_std(std::span<const double> v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

Tensor cc_term(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape()) throw ShapeError("CC: map shapes differ");
    if (population_std(pred.data()) < kDegenerateStd || population_std(target.data()) < kDegenerateStd) {
        return Tensor::scalar(0.0);
    }
    const Tensor dp = sub(pred, mean(pred));
    const Tensor dt = sub(target, mean(target));
    const Tensor cov = mean(mul(dp, dt));
    const Tensor sp = sqrt(mean(square(dp)));
    const Tensor st = sqrt(mean(square(dt)));
    return div(cov, mul(sp, st));
}

Tensor nss_term(const Tensor& pred, const std::vector<PixelFixation>& fixations) {
    if (pred.rank() != 2) throw ShapeError("NSS: expected an H x W map");
    if (fixations.empty()) throw std::invalid_argument("NSS: no fixations");
    const std::size_t H = pred.dim(0), W = pred.dim(1);
    std::vector<std::size_t> idx;
    for (const auto& f : fixations) {
        if (f.x >= W || f.y >= H) throw std::out_of_range("NSS: fixation outside the map");
        idx.push_back(f.y * W + f.x);
    }
    if (population_std(pred.data()) < kDegenerateStd) return Tensor::scalar(0.0);
    const Tensor centred = sub(pred, mean(pred));
    const Tensor sd = sqrt(mean(square(centred)));
    return div(mean(gather(centred, idx)), sd);
}

Tensor loss_sal(const Tensor& pred, const Tensor& target, const std::vector<PixelFixation>& fixations,
                const LossWeights& weights) {
    if (pred.shape() != target.shape()) throw ShapeError("loss_sal: prediction and target shapes differ");
    const Tensor l1 = mean(abs(sub(pred, target)));
    Tensor loss = sub(l1, scale(cc_term(pred, target), weights.beta));
    return sub(loss, scale(nss_term(pred, fixations), weights.gamma));
}

Tensor loss_total(const Tensor& sal, const std::vector<Tensor>& prox, double lambda) {
    if (prox.empty() || lambda == 0.0) return sal;
    Tensor total = prox[0];
    for (std::size_t l = 1; l < prox.size(); ++l) total = add(total, prox[l]);
    return add(sal, scale(total, lambda));
}

}  // namespace semsal

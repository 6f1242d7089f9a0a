#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "pgsv/model.hpp"
#include "pgsv/rng.hpp"

namespace pgsv {

struct IgPosterior {
    double shape;
    double scale;
};

struct NormalPosterior {
    double mean;
    double var;
};

/// Posterior of sigma^2 given phi under the IG(a0/2, b0/2) prior and the
/// mu = 0 residuals x_t - phi x_{t-1}.
inline IgPosterior sigma2_posterior(double phi, const LatentPath& x, const IgPrior& prior) {
    if (x.size() < 2) {
        throw std::invalid_argument("sigma2_posterior: path needs n >= 1");
    }
    if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
        throw std::invalid_argument("sigma2_posterior: prior hyperparameters must be positive");
    }
    const std::size_t n = x.size() - 1;
    double rss = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const double r = x[t] - phi * x[t - 1];
        rss += r * r;
    }
    return {0.5 * (prior.a + static_cast<double>(n) + 1.0), 0.5 * (prior.b + rss)};
}

inline double sample_sigma2_ig(double phi, const LatentPath& x, const IgPrior& prior,
                               RngState& rng) {
    const auto post = sigma2_posterior(phi, x, prior);
    return draw_inverse_gamma(post.shape, post.scale, rng);
}

/// Posterior N(Bb, B) of phi given sigma under a N(phi_mean, phi_var) prior,
/// mu = 0 convention.
inline NormalPosterior phi_posterior(double sigma, const LatentPath& x, double phi_mean,
                                     double phi_var) {
    if (sigma == 0.0) {
        throw std::invalid_argument("phi_posterior: sigma must be nonzero");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("phi_posterior: path needs n >= 1");
    }
    const double s2 = sigma * sigma;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        sxx += x[t - 1] * x[t - 1];
        sxy += x[t] * x[t - 1];
    }
    const double b_inv = 1.0 / phi_var + sxx / s2;
    const double b = phi_mean / phi_var + sxy / s2;
    return {b / b_inv, 1.0 / b_inv};
}

inline double sample_phi_normal(double sigma, const LatentPath& x, double phi_mean,
                                double phi_var, RngState& rng) {
    const auto post = phi_posterior(sigma, x, phi_mean, phi_var);
    return post.mean + std::sqrt(post.var) * draw_standard_normal(rng);
}

/// Posterior of the level mu under a diffuse prior.
inline NormalPosterior mu_posterior(double phi, double sigma, const LatentPath& x) {
    if (!(std::fabs(phi) < 1.0)) {
        throw std::invalid_argument("mu_posterior: |phi| must be < 1");
    }
    if (sigma == 0.0) {
        throw std::invalid_argument("mu_posterior: sigma must be nonzero");
    }
    const double s2 = sigma * sigma;
    const double n = static_cast<double>(x.size() - 1);
    const double var = s2 / (n * (1.0 - phi) * (1.0 - phi) + (1.0 - phi * phi));
    double resid = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        resid += x[t] - phi * x[t - 1];
    }
    const double mean = var * ((1.0 - phi * phi) * x[0] + (1.0 - phi) * resid) / s2;
    return {mean, var};
}

inline double sample_mu(double phi, double sigma, const LatentPath& x, RngState& rng) {
    const auto post = mu_posterior(phi, sigma, x);
    return post.mean + std::sqrt(post.var) * draw_standard_normal(rng);
}

/// Posterior of beta_i^2 given the path, under the IG(a_i/2, b_i/2) prior.
inline IgPosterior beta2_posterior(std::span<const double> y_col, const LatentPath& x,
                                   const IgPrior& prior) {
    if (y_col.size() + 1 != x.size()) {
        throw std::invalid_argument("beta2_posterior: path length must be n + 1");
    }
    if (y_col.empty()) {
        throw std::invalid_argument("beta2_posterior: empty column");
    }
    const double n = static_cast<double>(y_col.size());
    double s = 0.0;
    for (std::size_t t = 0; t < y_col.size(); ++t) {
        s += y_col[t] * y_col[t] / std::exp(x[t + 1]);
    }
    return {0.5 * (prior.a + n + 1.0), 0.5 * (prior.b + s)};
}

inline double sample_beta2(std::span<const double> y_col, const LatentPath& x,
                           const IgPrior& prior, RngState& rng) {
    const auto post = beta2_posterior(y_col, x, prior);
    return draw_inverse_gamma(post.shape, post.scale, rng);
}

/// Tuning state of the adaptive random walk proposal: global scale
/// lambda_j, running mean mu_j, running covariance Sigma_j (row-major),
/// and the step counter behind the gamma_j = j^(-gamma_exponent) schedule.
struct AdapterState {
    double lambda = 2.38 * 2.38 / 2.0;
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 4> cov{0.01, 0.0, 0.0, 0.01};
    std::uint64_t step_index = 0;
    double alpha_star = 0.234;
    double gamma_exponent = 0.6;

    void validate() const {
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("AdapterState: lambda must be positive");
        }
        if (!(gamma_exponent > 0.5) || !(gamma_exponent <= 1.0)) {
            throw std::invalid_argument("AdapterState: gamma exponent must be in (0.5, 1]");
        }
        if (cov[1] != cov[2]) {
            throw std::invalid_argument("AdapterState: covariance must be symmetric");
        }
        const double tr = cov[0] + cov[3];
        const double det = cov[0] * cov[3] - cov[1] * cov[2];
        if (cov[0] < 0.0 || cov[3] < 0.0 || det < -1e-12 * (1.0 + tr * tr)) {
            throw std::invalid_argument("AdapterState: covariance must be PSD");
        }
    }
};

/// Stochastic-approximation update of (lambda, mean, cov) after a step
/// that produced theta_new with acceptance probability alpha.
inline AdapterState adapter_update(AdapterState a, const std::array<double, 2>& theta_new,
                                   double alpha, double gamma) {
    a.lambda = std::exp(std::log(a.lambda) + gamma * (alpha - a.alpha_star));
    const double d0 = theta_new[0] - a.mean[0];
    const double d1 = theta_new[1] - a.mean[1];
    a.cov[0] += gamma * (d0 * d0 - a.cov[0]);
    a.cov[1] += gamma * (d0 * d1 - a.cov[1]);
    a.cov[2] = a.cov[1];
    a.cov[3] += gamma * (d1 * d1 - a.cov[3]);
    a.mean[0] += gamma * d0;
    a.mean[1] += gamma * d1;
    return a;
}

struct RwmResult {
    std::array<double, 2> theta;
    bool accepted = false;
    double alpha = 0.0;
    AdapterState adapter;
};

/// One random walk Metropolis step on theta = (phi, sigma) targeting
/// exp(joint_theta_logdensity). With adapt set, the proposal follows the
/// diminishing-adaptation recursion; otherwise the adapter is returned
/// unchanged.
inline RwmResult rwm_joint_step(const std::array<double, 2>& theta, double mu,
                                const LatentPath& x, const PriorSpec& prior,
                                const AdapterState& adapter, bool adapt, RngState& rng) {
    adapter.validate();
    const double g_cur = joint_theta_logdensity(theta[0], theta[1], mu, x, prior);
    if (!std::isfinite(g_cur)) {
        throw std::runtime_error("rwm_joint_step: log-density not finite at current theta");
    }

    // Cholesky of lambda * (Sigma + eps I); the ridge keeps the proposal
    // nondegenerate when the adapted covariance is rank deficient.
    const double eps = 1e-10;
    const double c00 = adapter.lambda * (adapter.cov[0] + eps);
    const double c01 = adapter.lambda * adapter.cov[1];
    const double c11 = adapter.lambda * (adapter.cov[3] + eps);
    const double l00 = std::sqrt(c00);
    const double l10 = c01 / l00;
    const double l11 = std::sqrt(std::max(c11 - l10 * l10, 0.0));

    const double z0 = draw_standard_normal(rng);
    const double z1 = draw_standard_normal(rng);
    const std::array<double, 2> prop{theta[0] + l00 * z0,
                                     theta[1] + l10 * z0 + l11 * z1};

    const double g_prop = joint_theta_logdensity(prop[0], prop[1], mu, x, prior);
    const double alpha = std::exp(std::min(0.0, g_prop - g_cur));
    const bool accepted = rng.uniform() < alpha;

    RwmResult res;
    res.theta = accepted ? prop : theta;
    res.accepted = accepted;
    res.alpha = alpha;
    res.adapter = adapter;
    if (adapt) {
        const std::uint64_t j1 = adapter.step_index + 1;
        const double gamma =
            std::pow(static_cast<double>(j1), -adapter.gamma_exponent);
        res.adapter = adapter_update(adapter, res.theta, alpha, gamma);
        res.adapter.step_index = j1;
    }
    return res;
}

}  // namespace pgsv

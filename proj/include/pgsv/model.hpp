#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgsv/rng.hpp"

namespace pgsv {

/// Univariate SV parameters. The state level mu and the observation
/// scale beta are kept as separate fields: three-parameter fits maintain
/// beta = exp(mu/2), while two-parameter fits hold mu = 0 with beta fixed
/// at a given value.
struct SvParams {
    double phi = 0.0;
    double sigma = 1.0;
    double mu = 0.0;
    double beta = 1.0;

    static SvParams tied(double phi, double sigma, double mu) {
        return {phi, sigma, mu, std::exp(0.5 * mu)};
    }
};

/// Multivariate SV parameters: one latent volatility path (level zero)
/// driving p assets with per-asset scales.
struct MsvParams {
    double phi = 0.0;
    double sigma = 1.0;
    std::vector<double> betas;
};

/// Inverse-gamma hyperparameters in the halved convention: the prior is
/// IG(a/2, b/2).
struct IgPrior {
    double a = 5.0;
    double b = 0.05;
};

struct PriorSpec {
    BivariateNormalSpec theta_prior{0.95, 0.2, 0.1, 0.2, -0.5};
    IgPrior ig_state{5.0, 0.05};
    std::vector<IgPrior> ig_beta;

    // phi prior for individual-sampling mode reuses the joint prior's
    // first marginal.
    double phi_mean() const { return theta_prior.mean1; }
    double phi_var() const { return theta_prior.sd1 * theta_prior.sd1; }

    IgPrior beta_prior(std::size_t asset) const {
        if (asset < ig_beta.size()) {
            return ig_beta[asset];
        }
        return IgPrior{4.0, 2.0};
    }
};

/// Log-volatility trajectory x_{0:n}.
using LatentPath = std::vector<double>;

/// n x p panel of returns, row-major; p = 1 for univariate series.
struct ReturnsPanel {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> data;
    std::vector<std::string> labels;

    double at(std::size_t t, std::size_t i) const { return data[t * p + i]; }
    std::span<const double> row(std::size_t t) const {
        return std::span<const double>(data).subspan(t * p, p);
    }
};

inline double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

namespace detail {

inline double transition_logpdf_impl(double x_prev, double x_curr,
                                     double phi, double sigma, double mu) {
    if (sigma == 0.0) {
        throw std::invalid_argument("transition_logpdf: sigma must be nonzero");
    }
    return normal_logpdf(x_curr, mu + phi * (x_prev - mu), sigma * sigma);
}

inline double initial_logpdf_impl(double x0, double phi, double sigma, double mu) {
    if (sigma == 0.0) {
        throw std::invalid_argument("initial_logpdf: sigma must be nonzero");
    }
    if (!(std::fabs(phi) < 1.0)) {
        throw std::invalid_argument("initial_logpdf: |phi| must be < 1");
    }
    return normal_logpdf(x0, mu, sigma * sigma / (1.0 - phi * phi));
}

inline double observation_logpdf_impl(std::span<const double> y_row, double x_t,
                                      std::span<const double> betas) {
    if (y_row.size() != betas.size()) {
        throw std::invalid_argument("observation_logpdf: y row has " +
                                    std::to_string(y_row.size()) + " entries, expected " +
                                    std::to_string(betas.size()));
    }
    const double ex = std::exp(x_t);
    double lp = 0.0;
    for (std::size_t i = 0; i < y_row.size(); ++i) {
        lp += normal_logpdf(y_row[i], 0.0, betas[i] * betas[i] * ex);
    }
    return lp;
}

}  // namespace detail

inline double transition_logpdf(double x_prev, double x_curr, const SvParams& p) {
    return detail::transition_logpdf_impl(x_prev, x_curr, p.phi, p.sigma, p.mu);
}
inline double transition_logpdf(double x_prev, double x_curr, const MsvParams& p) {
    return detail::transition_logpdf_impl(x_prev, x_curr, p.phi, p.sigma, 0.0);
}

inline double initial_logpdf(double x0, const SvParams& p) {
    return detail::initial_logpdf_impl(x0, p.phi, p.sigma, p.mu);
}
inline double initial_logpdf(double x0, const MsvParams& p) {
    return detail::initial_logpdf_impl(x0, p.phi, p.sigma, 0.0);
}

inline double observation_logpdf(std::span<const double> y_row, double x_t,
                                 const SvParams& p) {
    return detail::observation_logpdf_impl(y_row, x_t, std::span<const double>(&p.beta, 1));
}
inline double observation_logpdf(std::span<const double> y_row, double x_t,
                                 const MsvParams& p) {
    return detail::observation_logpdf_impl(y_row, x_t, p.betas);
}

/// Autocorrelation of squared returns at lag h for the SV model:
/// (exp(sigma_x^2 phi^h) - 1) / (kappa exp(sigma_x^2) - 1) with
/// sigma_x^2 = sigma^2 / (1 - phi^2); kappa_eps is the noise kurtosis.
inline double theoretical_sv_acf(double phi, double sigma, double kappa_eps, int h) {
    if (!(std::fabs(phi) < 1.0)) {
        throw std::invalid_argument("theoretical_sv_acf: |phi| must be < 1");
    }
    if (!(kappa_eps >= 1.0)) {
        throw std::invalid_argument("theoretical_sv_acf: kappa_eps must be >= 1");
    }
    if (h < 1) {
        throw std::invalid_argument("theoretical_sv_acf: lag must be >= 1");
    }
    const double sx2 = sigma * sigma / (1.0 - phi * phi);
    return std::expm1(sx2 * std::pow(phi, h)) /
           (kappa_eps * std::exp(sx2) - 1.0);
}

/// Unnormalized log of p(theta | mu, x_{0:n}, y_{1:n}) for theta = (phi, sigma):
/// the bivariate-normal prior plus the complete-data state terms. Proposals
/// with |phi| >= 1 get -inf rather than an error so Metropolis can reject
/// them.
inline double joint_theta_logdensity(double phi, double sigma, double mu,
                                     const LatentPath& x, const PriorSpec& prior) {
    if (sigma == 0.0) {
        throw std::invalid_argument("joint_theta_logdensity: sigma must be nonzero");
    }
    if (!(std::fabs(phi) < 1.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    if (x.empty()) {
        throw std::invalid_argument("joint_theta_logdensity: empty path");
    }
    const std::size_t n = x.size() - 1;
    const double s2 = sigma * sigma;
    double quad = (1.0 - phi * phi) * (x[0] - mu) * (x[0] - mu);
    for (std::size_t t = 1; t <= n; ++t) {
        const double r = (x[t] - mu) - phi * (x[t - 1] - mu);
        quad += r * r;
    }
    return prior.theta_prior.logpdf(phi, sigma) +
           0.5 * std::log1p(-phi * phi) -
           static_cast<double>(n + 1) * std::log(std::fabs(sigma)) -
           quad / (2.0 * s2);
}

}  // namespace pgsv

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "pgsv/model.hpp"
#include "pgsv/rng.hpp"

namespace pgsv {

namespace detail {

// Shared generator: latent AR(1) around `mu`, then per-asset returns.
// Draw order (x0, w_1..w_n, then eps row by row) is identical for the
// univariate and multivariate entry points so that p = 1 reduces exactly.
inline std::pair<LatentPath, ReturnsPanel> simulate_impl(
    double phi, double sigma, double mu, std::span<const double> betas,
    std::size_t n, RngState& rng) {
    if (!(std::fabs(phi) < 1.0)) {
        throw std::invalid_argument("simulate: |phi| must be < 1");
    }
    if (betas.empty()) {
        throw std::invalid_argument("simulate: at least one asset required");
    }
    if (n == 0) {
        throw std::invalid_argument("simulate: n must be >= 1");
    }

    LatentPath x(n + 1);
    x[0] = mu + std::fabs(sigma) / std::sqrt(1.0 - phi * phi) * draw_standard_normal(rng);
    for (std::size_t t = 1; t <= n; ++t) {
        x[t] = mu + phi * (x[t - 1] - mu) + sigma * draw_standard_normal(rng);
    }

    ReturnsPanel y;
    y.n = n;
    y.p = betas.size();
    y.data.resize(n * y.p);
    for (std::size_t i = 0; i < y.p; ++i) {
        y.labels.push_back("y" + std::to_string(i + 1));
    }
    for (std::size_t t = 1; t <= n; ++t) {
        const double vol = std::exp(0.5 * x[t]);
        for (std::size_t i = 0; i < y.p; ++i) {
            y.data[(t - 1) * y.p + i] = betas[i] * vol * draw_standard_normal(rng);
        }
    }
    return {std::move(x), std::move(y)};
}

}  // namespace detail

/// Simulate x_{0:n} from the stationary AR(1) recursion and returns
/// y_t = beta exp(x_t / 2) eps_t.
inline std::pair<LatentPath, ReturnsPanel> simulate_sv(const SvParams& params,
                                                       std::size_t n, RngState& rng) {
    return detail::simulate_impl(params.phi, params.sigma, params.mu,
                                 std::span<const double>(&params.beta, 1), n, rng);
}

/// Simulate one shared latent path driving p assets.
inline std::pair<LatentPath, ReturnsPanel> simulate_msv(const MsvParams& params,
                                                        std::size_t n, RngState& rng) {
    return detail::simulate_impl(params.phi, params.sigma, 0.0, params.betas, n, rng);
}

}  // namespace pgsv

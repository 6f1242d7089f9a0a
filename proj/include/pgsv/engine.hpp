#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgsv/conditionals.hpp"
#include "pgsv/model.hpp"
#include "pgsv/particle.hpp"
#include "pgsv/rng.hpp"

namespace pgsv {

enum class FitMode { joint2, joint3, individual2, msv };

inline const char* to_string(FitMode m) {
    switch (m) {
        case FitMode::joint2: return "joint2";
        case FitMode::joint3: return "joint3";
        case FitMode::individual2: return "individual2";
        case FitMode::msv: return "msv";
    }
    return "?";
}

struct FitConfig {
    std::size_t n_particles = 20;
    std::size_t iterations = 5000;  // total sweeps, burnin included
    std::size_t burnin = 100;
    bool adapt = true;
    std::uint64_t seed = 0;
    PriorSpec prior;
    FitMode mode = FitMode::joint2;
    std::size_t thin = 1;        // parameter traces
    std::size_t state_thin = 10; // retained state paths
    double fixed_beta = 1.0;     // observation scale held fixed in 2p modes
    AdapterState tuning;
    double band_level = 0.95;

    std::vector<std::string> validate() const {
        std::vector<std::string> problems;
        if (n_particles < 2) {
            problems.push_back("particles: must be >= 2 for the conditional filter");
        }
        if (iterations <= burnin) {
            problems.push_back("iterations: must exceed burnin");
        }
        if (thin < 1) {
            problems.push_back("thin: must be >= 1");
        }
        if (state_thin < 1) {
            problems.push_back("state_thin: must be >= 1");
        }
        if (!(fixed_beta > 0.0)) {
            problems.push_back("beta: fixed observation scale must be positive");
        }
        if (!(band_level > 0.0) || !(band_level < 1.0)) {
            problems.push_back("band_level: must lie in (0, 1)");
        }
        if (!(tuning.lambda > 0.0)) {
            problems.push_back("lambda0: must be positive");
        }
        if (!(tuning.gamma_exponent > 0.5) || !(tuning.gamma_exponent <= 1.0)) {
            problems.push_back("gamma_exponent: must lie in (0.5, 1]");
        }
        return problems;
    }
};

struct ChainOutput {
    std::vector<std::array<double, 2>> theta_trace;   // (phi, sigma)
    std::vector<double> mu_trace;                     // joint3 only
    std::vector<std::vector<double>> beta_traces;     // msv: one vector per asset
    std::vector<LatentPath> state_draws;
    double acceptance_rate = 1.0;
    AdapterState final_tuning;  // adapter state after the last sweep
    FitConfig config;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::size_t retained_length(const FitConfig& cfg) {
    const std::size_t kept = cfg.iterations - cfg.burnin;
    return (kept + cfg.thin - 1) / cfg.thin;
}

// Warm-start reference path: one bootstrap filter pass at the initial
// parameters, drawing a full trajectory from the final weights.
template <typename Params>
LatentPath initial_path(const ReturnsPanel& y, const Params& params, std::size_t N,
                        RngState& rng) {
    const auto boot = bootstrap_pf(y, params, N, rng);
    return draw_trajectory(boot.system, rng);
}

}  // namespace detail

/// Algorithm: alternate CPF-AS state draws with a joint RWM update of
/// (phi, sigma); in three-parameter mode mu is then drawn from its
/// closed-form posterior and beta follows as exp(mu/2).
inline ChainOutput fit_sv_joint(const ReturnsPanel& y, const FitConfig& cfg, RngState& rng) {
    if (y.p != 1) {
        throw std::invalid_argument("fit_sv_joint: univariate series required");
    }
    if (cfg.mode != FitMode::joint2 && cfg.mode != FitMode::joint3) {
        throw std::invalid_argument("fit_sv_joint: mode must be joint2 or joint3");
    }
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        throw std::invalid_argument("fit config: " + problems.front());
    }
    const auto start = std::chrono::steady_clock::now();
    const bool three_param = cfg.mode == FitMode::joint3;

    std::array<double, 2> theta{cfg.prior.theta_prior.mean1, cfg.prior.theta_prior.mean2};
    double mu = 0.0;
    SvParams params{theta[0], theta[1], mu,
                    three_param ? std::exp(0.5 * mu) : cfg.fixed_beta};
    AdapterState adapter = cfg.tuning;
    adapter.mean = theta;

    LatentPath path = detail::initial_path(y, params, cfg.n_particles, rng);

    ChainOutput out;
    out.config = cfg;
    out.theta_trace.reserve(detail::retained_length(cfg));
    std::size_t accepted = 0, counted = 0, kept = 0;

    for (std::size_t sweep = 1; sweep <= cfg.iterations; ++sweep) {
        path = cpf_as(y, params, cfg.n_particles, path, rng);

        const auto step = rwm_joint_step(theta, mu, path, cfg.prior, adapter, cfg.adapt, rng);
        theta = step.theta;
        adapter = step.adapter;
        if (three_param) {
            mu = sample_mu(theta[0], theta[1], path, rng);
        }
        params = SvParams{theta[0], theta[1], mu,
                          three_param ? std::exp(0.5 * mu) : cfg.fixed_beta};

        if (sweep > cfg.burnin) {
            accepted += step.accepted ? 1 : 0;
            ++counted;
            const std::size_t r = sweep - cfg.burnin - 1;
            if (r % cfg.thin == 0) {
                out.theta_trace.push_back(theta);
                if (three_param) {
                    out.mu_trace.push_back(mu);
                }
                if (kept % cfg.state_thin == 0) {
                    out.state_draws.push_back(path);
                }
                ++kept;
            }
        }
    }
    out.acceptance_rate = counted ? static_cast<double>(accepted) / counted : 0.0;
    out.final_tuning = adapter;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Baseline sampler: CPF-AS state draws with phi and sigma drawn one at a
/// time from their conjugate conditionals (mu held at zero).
inline ChainOutput fit_sv_individual(const ReturnsPanel& y, const FitConfig& cfg,
                                     RngState& rng) {
    if (y.p != 1) {
        throw std::invalid_argument("fit_sv_individual: univariate series required");
    }
    if (cfg.mode != FitMode::individual2) {
        throw std::invalid_argument("fit_sv_individual: mode must be individual2");
    }
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        throw std::invalid_argument("fit config: " + problems.front());
    }
    const auto start = std::chrono::steady_clock::now();

    double phi = cfg.prior.theta_prior.mean1;
    double sigma = cfg.prior.theta_prior.mean2;
    SvParams params{phi, sigma, 0.0, cfg.fixed_beta};
    LatentPath path = detail::initial_path(y, params, cfg.n_particles, rng);

    ChainOutput out;
    out.config = cfg;
    out.theta_trace.reserve(detail::retained_length(cfg));
    std::size_t kept = 0;

    for (std::size_t sweep = 1; sweep <= cfg.iterations; ++sweep) {
        path = cpf_as(y, params, cfg.n_particles, path, rng);

        // redraw until |phi| < 1: the N(Bb, B) conditional is restricted
        // to the stationary region the filter requires
        int tries = 0;
        do {
            phi = sample_phi_normal(sigma, path, cfg.prior.phi_mean(), cfg.prior.phi_var(),
                                    rng);
            if (++tries > 1000) {
                throw std::runtime_error(
                    "fit_sv_individual: phi conditional has no mass inside (-1, 1)");
            }
        } while (!(std::fabs(phi) < 1.0));
        sigma = std::sqrt(sample_sigma2_ig(phi, path, cfg.prior.ig_state, rng));
        params = SvParams{phi, sigma, 0.0, cfg.fixed_beta};

        if (sweep > cfg.burnin) {
            const std::size_t r = sweep - cfg.burnin - 1;
            if (r % cfg.thin == 0) {
                out.theta_trace.push_back({phi, sigma});
                if (kept % cfg.state_thin == 0) {
                    out.state_draws.push_back(path);
                }
                ++kept;
            }
        }
    }
    out.acceptance_rate = 1.0;  // conjugate draws only
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Multivariate fit: CPF-AS with the product observation density, joint
/// RWM for (phi, sigma), then per-asset conjugate draws of beta_i^2.
inline ChainOutput fit_msv(const ReturnsPanel& y, const FitConfig& cfg, RngState& rng) {
    if (y.p < 1) {
        throw std::invalid_argument("fit_msv: panel must have at least one asset");
    }
    if (cfg.mode != FitMode::msv) {
        throw std::invalid_argument("fit_msv: mode must be msv");
    }
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        throw std::invalid_argument("fit config: " + problems.front());
    }
    const auto start = std::chrono::steady_clock::now();
    const std::size_t p = y.p;

    std::array<double, 2> theta{cfg.prior.theta_prior.mean1, cfg.prior.theta_prior.mean2};
    MsvParams params{theta[0], theta[1], std::vector<double>(p, 1.0)};
    AdapterState adapter = cfg.tuning;
    adapter.mean = theta;

    LatentPath path = detail::initial_path(y, params, cfg.n_particles, rng);

    ChainOutput out;
    out.config = cfg;
    out.beta_traces.assign(p, {});
    std::size_t accepted = 0, counted = 0, kept = 0;
    std::vector<double> y_col(y.n);

    for (std::size_t sweep = 1; sweep <= cfg.iterations; ++sweep) {
        path = cpf_as(y, params, cfg.n_particles, path, rng);

        const auto step =
            rwm_joint_step(theta, 0.0, path, cfg.prior, adapter, cfg.adapt, rng);
        theta = step.theta;
        adapter = step.adapter;
        params.phi = theta[0];
        params.sigma = theta[1];
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t t = 0; t < y.n; ++t) {
                y_col[t] = y.at(t, i);
            }
            params.betas[i] =
                std::sqrt(sample_beta2(y_col, path, cfg.prior.beta_prior(i), rng));
        }

        if (sweep > cfg.burnin) {
            accepted += step.accepted ? 1 : 0;
            ++counted;
            const std::size_t r = sweep - cfg.burnin - 1;
            if (r % cfg.thin == 0) {
                out.theta_trace.push_back(theta);
                for (std::size_t i = 0; i < p; ++i) {
                    out.beta_traces[i].push_back(params.betas[i]);
                }
                if (kept % cfg.state_thin == 0) {
                    out.state_draws.push_back(path);
                }
                ++kept;
            }
        }
    }
    out.acceptance_rate = counted ? static_cast<double>(accepted) / counted : 0.0;
    out.final_tuning = adapter;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Dispatch on the configured mode.
inline ChainOutput fit(const ReturnsPanel& y, const FitConfig& cfg, RngState& rng) {
    switch (cfg.mode) {
        case FitMode::joint2:
        case FitMode::joint3:
            return fit_sv_joint(y, cfg, rng);
        case FitMode::individual2:
            return fit_sv_individual(y, cfg, rng);
        case FitMode::msv:
            return fit_msv(y, cfg, rng);
    }
    throw std::invalid_argument("fit: unknown mode");
}

}  // namespace pgsv

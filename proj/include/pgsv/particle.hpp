#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgsv/model.hpp"
#include "pgsv/rng.hpp"

namespace pgsv {

/// All particle weights vanished at some time step; carries the step index.
class weight_collapse_error : public std::runtime_error {
public:
    explicit weight_collapse_error(std::size_t t)
        : std::runtime_error("particle filter: all weights collapsed at t = " +
                             std::to_string(t)),
          time_index(t) {}
    std::size_t time_index;
};

inline double logsumexp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        m = std::max(m, x);
    }
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0.0;
    for (double x : v) {
        s += std::exp(x - m);
    }
    return m + std::log(s);
}

/// exp(logw - logsumexp(logw)); throws weight_collapse_error when every
/// entry is -inf.
inline std::vector<double> normalize_log_weights(std::span<const double> logw,
                                                 std::size_t time_index = 0) {
    for (double x : logw) {
        if (std::isnan(x)) {
            throw std::invalid_argument("normalize_log_weights: NaN weight");
        }
    }
    const double lse = logsumexp(logw);
    if (!std::isfinite(lse)) {
        throw weight_collapse_error(time_index);
    }
    std::vector<double> w(logw.size());
    for (std::size_t i = 0; i < logw.size(); ++i) {
        w[i] = std::exp(logw[i] - lse);
    }
    return w;
}

/// `count` iid indices from Discrete(weights), via inverse-CDF lookups.
inline std::vector<std::uint32_t> multinomial_resample(std::span<const double> weights,
                                                       std::size_t count, RngState& rng) {
    detail::check_probability_vector(weights);
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cum[i] = acc;
    }
    cum.back() = std::max(cum.back(), 1.0);
    std::vector<std::uint32_t> idx(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        idx[k] = static_cast<std::uint32_t>(it - cum.begin());
    }
    return idx;
}

/// Weighted trajectories with ancestor bookkeeping. Paths are stored as
/// per-step values plus ancestor indices and reconstructed by backtracking.
struct ParticleSystem {
    std::size_t num_particles = 0;   // N
    std::size_t path_length = 0;     // n + 1
    std::vector<double> values;      // [t * N + j]
    std::vector<double> log_weights; // [t * N + j], unnormalized
    std::vector<std::uint32_t> ancestors;  // [(t - 1) * N + j] for t = 1..n

    double value(std::size_t t, std::size_t j) const {
        return values[t * num_particles + j];
    }
    std::uint32_t ancestor(std::size_t t, std::size_t j) const {
        return ancestors[(t - 1) * num_particles + j];
    }
    std::span<const double> log_weights_at(std::size_t t) const {
        return std::span<const double>(log_weights).subspan(t * num_particles,
                                                            num_particles);
    }
    std::vector<double> normalized_weights(std::size_t t) const {
        return normalize_log_weights(log_weights_at(t), t);
    }

    LatentPath trajectory(std::size_t j) const {
        LatentPath x(path_length);
        std::size_t k = j;
        for (std::size_t t = path_length; t-- > 0;) {
            x[t] = value(t, k);
            if (t > 0) {
                k = ancestor(t, k);
            }
        }
        return x;
    }
};

/// One trajectory drawn from the final-step weights.
inline LatentPath draw_trajectory(const ParticleSystem& ps, RngState& rng) {
    const auto w = ps.normalized_weights(ps.path_length - 1);
    return ps.trajectory(draw_discrete(w, rng));
}

/// Ancestor-sampling weights for reconnecting the reference value x_ref
/// to the time-(t-1) cloud: log w_{t-1}^j + log p(x_ref | x_{t-1}^j).
inline std::vector<double> ancestor_log_weights(std::span<const double> prev_values,
                                                std::span<const double> prev_log_norm_weights,
                                                double x_ref, double phi, double sigma,
                                                double mu) {
    std::vector<double> lw(prev_values.size());
    for (std::size_t j = 0; j < prev_values.size(); ++j) {
        lw[j] = prev_log_norm_weights[j] +
                detail::transition_logpdf_impl(prev_values[j], x_ref, phi, sigma, mu);
    }
    return lw;
}

namespace detail {

enum class PinMode { none, reference, ancestor_sampled };

struct FilterOutput {
    ParticleSystem system;
    double loglik = 0.0;
};

// Bootstrap filter over the SV state space; the proposal is the state
// transition (stationary density at t = 0), so incremental weights are
// the observation densities. When pinned, particle N-1 tracks the
// reference trajectory; with ancestor sampling its ancestor is redrawn
// from transition-reweighted weights each step.
inline FilterOutput filter_impl(const ReturnsPanel& y, double phi, double sigma,
                                double mu, std::span<const double> betas, std::size_t N,
                                const LatentPath* ref, PinMode pin, RngState& rng) {
    if (N < 1) {
        throw std::invalid_argument("particle filter: N must be >= 1");
    }
    if (y.n < 1) {
        throw std::invalid_argument("particle filter: at least one observation required");
    }
    if (y.p != betas.size()) {
        throw std::invalid_argument("particle filter: panel has " + std::to_string(y.p) +
                                    " assets, parameters have " +
                                    std::to_string(betas.size()));
    }
    if (!(std::fabs(phi) < 1.0)) {
        throw std::invalid_argument("particle filter: |phi| must be < 1");
    }
    const std::size_t n = y.n;
    if (pin != PinMode::none) {
        if (ref == nullptr || ref->size() != n + 1) {
            throw std::invalid_argument("conditional filter: reference length " +
                                        std::to_string(ref ? ref->size() : 0) +
                                        ", expected " + std::to_string(n + 1));
        }
    }

    ParticleSystem ps;
    ps.num_particles = N;
    ps.path_length = n + 1;
    ps.values.resize((n + 1) * N);
    ps.log_weights.resize((n + 1) * N);
    ps.ancestors.resize(n * N);

    const std::size_t pinned = N - 1;
    const std::size_t free_count = (pin == PinMode::none) ? N : N - 1;
    const double stat_sd = std::fabs(sigma) / std::sqrt(1.0 - phi * phi);

    for (std::size_t j = 0; j < free_count; ++j) {
        ps.values[j] = mu + stat_sd * draw_standard_normal(rng);
    }
    if (pin != PinMode::none) {
        ps.values[pinned] = (*ref)[0];
    }
    // no observation at t = 0: prior proposal leaves the weights flat
    std::fill_n(ps.log_weights.begin(), N, 0.0);

    double loglik = 0.0;
    std::vector<double> logw_norm(N);

    for (std::size_t t = 1; t <= n; ++t) {
        const auto prev_logw = ps.log_weights_at(t - 1);
        const auto w_prev = normalize_log_weights(prev_logw, t - 1);
        for (std::size_t j = 0; j < N; ++j) {
            logw_norm[j] = std::log(w_prev[j]);
        }

        auto* anc = &ps.ancestors[(t - 1) * N];
        const auto draws = multinomial_resample(w_prev, free_count, rng);
        std::copy(draws.begin(), draws.end(), anc);

        const double* prev_vals = &ps.values[(t - 1) * N];
        double* vals = &ps.values[t * N];
        for (std::size_t j = 0; j < free_count; ++j) {
            const double xp = prev_vals[anc[j]];
            vals[j] = mu + phi * (xp - mu) + sigma * draw_standard_normal(rng);
        }

        if (pin != PinMode::none) {
            vals[pinned] = (*ref)[t];
            if (pin == PinMode::ancestor_sampled) {
                const auto alw = ancestor_log_weights(
                    std::span<const double>(prev_vals, N), logw_norm, (*ref)[t], phi,
                    sigma, mu);
                const auto aw = normalize_log_weights(alw, t - 1);
                anc[pinned] = static_cast<std::uint32_t>(draw_discrete(aw, rng));
            } else {
                anc[pinned] = static_cast<std::uint32_t>(pinned);
            }
        }

        double* logw = &ps.log_weights[t * N];
        const auto y_row = y.row(t - 1);
        for (std::size_t j = 0; j < N; ++j) {
            logw[j] = observation_logpdf_impl(y_row, vals[j], betas);
        }
        const double lse = logsumexp(std::span<const double>(logw, N));
        if (!std::isfinite(lse)) {
            throw weight_collapse_error(t);
        }
        loglik += lse - std::log(static_cast<double>(N));
    }

    return {std::move(ps), loglik};
}

inline FilterOutput filter_dispatch(const ReturnsPanel& y, const SvParams& p,
                                    std::size_t N, const LatentPath* ref, PinMode pin,
                                    RngState& rng) {
    return filter_impl(y, p.phi, p.sigma, p.mu, std::span<const double>(&p.beta, 1), N,
                       ref, pin, rng);
}
inline FilterOutput filter_dispatch(const ReturnsPanel& y, const MsvParams& p,
                                    std::size_t N, const LatentPath* ref, PinMode pin,
                                    RngState& rng) {
    return filter_impl(y, p.phi, p.sigma, 0.0, p.betas, N, ref, pin, rng);
}

}  // namespace detail

struct BootstrapResult {
    ParticleSystem system;
    double loglik = 0.0;
};

/// Bootstrap particle filter; returns the particle system and the
/// log-likelihood estimate sum_t log( (1/N) sum_j w_t^j ).
template <typename Params>
BootstrapResult bootstrap_pf(const ReturnsPanel& y, const Params& params, std::size_t N,
                             RngState& rng) {
    auto out = detail::filter_dispatch(y, params, N, nullptr, detail::PinMode::none, rng);
    return {std::move(out.system), out.loglik};
}

/// Conditional particle filter: full system with particle N pinned to ref.
template <typename Params>
ParticleSystem cpf_system(const ReturnsPanel& y, const Params& params, std::size_t N,
                          const LatentPath& ref, RngState& rng) {
    return detail::filter_dispatch(y, params, N, &ref, detail::PinMode::reference, rng)
        .system;
}

/// CPF-AS: as cpf_system, but the pinned particle's ancestor is redrawn
/// each step.
template <typename Params>
ParticleSystem cpf_as_system(const ReturnsPanel& y, const Params& params, std::size_t N,
                             const LatentPath& ref, RngState& rng) {
    return detail::filter_dispatch(y, params, N, &ref, detail::PinMode::ancestor_sampled,
                                   rng)
        .system;
}

/// One Gibbs draw of the state path via the conditional particle filter.
template <typename Params>
LatentPath cpf(const ReturnsPanel& y, const Params& params, std::size_t N,
               const LatentPath& ref, RngState& rng) {
    const auto ps = cpf_system(y, params, N, ref, rng);
    return draw_trajectory(ps, rng);
}

/// One Gibbs draw of the state path via CPF with ancestor sampling.
template <typename Params>
LatentPath cpf_as(const ReturnsPanel& y, const Params& params, std::size_t N,
                  const LatentPath& ref, RngState& rng) {
    const auto ps = cpf_as_system(y, params, N, ref, rng);
    return draw_trajectory(ps, rng);
}

}  // namespace pgsv

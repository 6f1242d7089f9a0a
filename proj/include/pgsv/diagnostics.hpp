#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pgsv/model.hpp"

namespace pgsv {

namespace detail {

inline double trace_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Sample autocorrelations rho(1..max_lag) with the biased 1/n
/// normalization.
inline std::vector<double> sample_acf(std::span<const double> trace, std::size_t max_lag) {
    if (max_lag < 1) {
        throw std::invalid_argument("sample_acf: max_lag must be >= 1");
    }
    if (trace.size() <= max_lag) {
        throw std::invalid_argument("sample_acf: trace length must exceed max_lag");
    }
    const double mean = detail::trace_mean(trace);
    double denom = 0.0;
    for (double x : trace) {
        denom += (x - mean) * (x - mean);
    }
    if (denom == 0.0) {
        throw std::invalid_argument("sample_acf: constant trace");
    }
    std::vector<double> rho(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < trace.size(); ++t) {
            num += (trace[t] - mean) * (trace[t + k] - mean);
        }
        rho[k - 1] = num / denom;
    }
    return rho;
}

/// Inefficiency factor IF = 1 + 2 sum rho(i), truncated by the initial
/// positive sequence rule: after the (1 + rho(1)) term, consecutive lag
/// pairs (rho(2k), rho(2k+1)) are added while their sum stays positive.
inline double inefficiency_factor(std::span<const double> trace) {
    if (trace.size() < 100) {
        throw std::invalid_argument("inefficiency_factor: trace length must be >= 100");
    }
    const std::size_t cap = std::min<std::size_t>(trace.size() - 2, 8192);
    const auto rho = sample_acf(trace, cap);
    double s = rho[0];
    for (std::size_t k = 2; k + 1 <= cap; k += 2) {
        const double pair = rho[k - 1] + rho[k];
        if (pair <= 0.0) {
            break;
        }
        s += pair;
    }
    return 1.0 + 2.0 * s;
}

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double median = 0.0;
    double q975 = 0.0;
};

/// Quantile by linear interpolation of order statistics on a sorted copy.
inline double quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty input");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline SummaryStats posterior_summary(std::span<const double> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("posterior_summary: empty trace");
    }
    SummaryStats s;
    s.mean = detail::trace_mean(trace);
    if (trace.size() > 1) {
        double ss = 0.0;
        for (double x : trace) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(trace.size() - 1));
    }
    s.q025 = quantile(trace, 0.025);
    s.median = quantile(trace, 0.5);
    s.q975 = quantile(trace, 0.975);
    return s;
}

struct StateBand {
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Pointwise mean and central credible band over retained state draws.
inline StateBand state_band(std::span<const LatentPath> draws, double level = 0.95) {
    if (draws.size() < 2) {
        throw std::invalid_argument("state_band: at least two draws required");
    }
    if (!(level > 0.0) || !(level < 1.0)) {
        throw std::invalid_argument("state_band: level must be in (0, 1)");
    }
    const std::size_t len = draws[0].size();
    for (const auto& d : draws) {
        if (d.size() != len) {
            throw std::invalid_argument("state_band: ragged draw lengths");
        }
    }
    const double lo = 0.5 * (1.0 - level);
    StateBand band;
    band.mean.resize(len);
    band.lower.resize(len);
    band.upper.resize(len);
    std::vector<double> col(draws.size());
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t j = 0; j < draws.size(); ++j) {
            col[j] = draws[j][t];
        }
        band.mean[t] = detail::trace_mean(col);
        band.lower[t] = quantile(col, lo);
        band.upper[t] = quantile(col, 1.0 - lo);
    }
    return band;
}

}  // namespace pgsv

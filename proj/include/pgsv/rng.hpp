#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgsv {

/// Counter-based generator (Philox 4x64, 10 rounds). The key is
/// (seed, stream): distinct keys give disjoint draw sequences, so
/// parallel chains can be seeded from one master seed without overlap.
class RngState {
public:
    explicit RngState(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{seed, stream} {}

    std::uint64_t seed() const { return key_[0]; }
    std::uint64_t stream() const { return key_[1]; }

    /// Derive an independently keyed generator for sub-task k.
    RngState substream(std::uint64_t k) const {
        std::uint64_t s = key_[1] + 0x9E3779B97F4A7C15ULL * (k + 1);
        s = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9ULL;
        s = (s ^ (s >> 27)) * 0x94D049BB133111EBULL;
        return RngState(key_[0], s ^ (s >> 31));
    }

    std::uint64_t next_u64() {
        if (idx_ == 4) {
            refill();
        }
        return block_[idx_++];
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static void mulhilo(std::uint64_t a, std::uint64_t b,
                        std::uint64_t& hi, std::uint64_t& lo) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    void refill() {
        std::array<std::uint64_t, 4> c = ctr_;
        std::array<std::uint64_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, c[0], hi0, lo0);
            mulhilo(kMul1, c[2], hi1, lo1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        block_ = c;
        idx_ = 0;
        if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) {
            ++ctr_[3];
        }
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> block_{0, 0, 0, 0};
    int idx_ = 4;
};

/// Parameters of a bivariate normal with correlation, validated on
/// construction.
struct BivariateNormalSpec {
    double mean1, mean2;
    double sd1, sd2;
    double corr;

    BivariateNormalSpec(double m1, double m2, double s1, double s2, double rho)
        : mean1(m1), mean2(m2), sd1(s1), sd2(s2), corr(rho) {
        if (!(sd1 > 0.0) || !(sd2 > 0.0)) {
            throw std::invalid_argument("BivariateNormalSpec: sd must be positive");
        }
        if (!(std::fabs(corr) < 1.0)) {
            throw std::invalid_argument("BivariateNormalSpec: |corr| must be < 1");
        }
    }

    double logpdf(double x, double y) const {
        const double zx = (x - mean1) / sd1;
        const double zy = (y - mean2) / sd2;
        const double r2 = 1.0 - corr * corr;
        const double quad = (zx * zx - 2.0 * corr * zx * zy + zy * zy) / r2;
        return -std::log(2.0 * std::numbers::pi * sd1 * sd2 * std::sqrt(r2)) - 0.5 * quad;
    }
};

inline double draw_standard_normal(RngState& rng) {
    const double u1 = rng.uniform_pos();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::array<double, 2> draw_bivariate_normal(const BivariateNormalSpec& spec,
                                                   RngState& rng) {
    const double z1 = draw_standard_normal(rng);
    const double z2 = draw_standard_normal(rng);
    const double x = spec.mean1 + spec.sd1 * z1;
    const double y = spec.mean2 + spec.sd2 * (spec.corr * z1 +
                                              std::sqrt(1.0 - spec.corr * spec.corr) * z2);
    return {x, y};
}

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
/// boost relation gamma(a) = gamma(a+1) * U^(1/a).
inline double draw_gamma(double shape, RngState& rng) {
    if (!(shape > 0.0)) {
        throw std::invalid_argument("draw_gamma: shape must be positive");
    }
    if (shape < 1.0) {
        const double u = rng.uniform_pos();
        return draw_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double z = draw_standard_normal(rng);
        double v = 1.0 + c * z;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform_pos();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
            return d * v;
        }
    }
}

/// Draw X with 1/X ~ Gamma(shape, rate=scale), i.e. X ~ InvGamma(shape, scale).
inline double draw_inverse_gamma(double shape, double scale, RngState& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("draw_inverse_gamma: shape and scale must be positive");
    }
    return scale / draw_gamma(shape, rng);
}

namespace detail {

inline void check_probability_vector(std::span<const double> weights) {
    if (weights.empty()) {
        throw std::invalid_argument("discrete draw: empty weight vector");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) {
            throw std::invalid_argument("discrete draw: negative weight at index " +
                                        std::to_string(i));
        }
        sum += weights[i];
    }
    if (sum == 0.0) {
        throw std::invalid_argument("discrete draw: all weights are zero");
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("discrete draw: weights sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-9");
    }
}

}  // namespace detail

/// One draw from Discrete(weights); weights must form a probability vector.
inline std::size_t draw_discrete(std::span<const double> weights, RngState& rng) {
    detail::check_probability_vector(weights);
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (u < cum) {
            return i;
        }
    }
    return weights.size() - 1;
}

}  // namespace pgsv

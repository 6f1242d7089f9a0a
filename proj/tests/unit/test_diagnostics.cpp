#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pgsv/diagnostics.hpp"
#include "pgsv/rng.hpp"

using namespace pgsv;

namespace {

std::vector<double> ar1_trace(double rho, std::size_t n, std::uint64_t seed) {
    RngState rng(seed);
    std::vector<double> v(n);
    v[0] = draw_standard_normal(rng) / std::sqrt(1.0 - rho * rho);
    for (std::size_t t = 1; t < n; ++t) {
        v[t] = rho * v[t - 1] + draw_standard_normal(rng);
    }
    return v;
}

}  // namespace

TEST_CASE("sample ACF", "[diagnostics]") {
    SECTION("iid noise has negligible autocorrelation") {
        RngState rng(67);
        std::vector<double> v(100'000);
        for (auto& x : v) {
            x = draw_standard_normal(rng);
        }
        const auto rho = sample_acf(v, 10);
        for (double r : rho) {
            CHECK(std::fabs(r) < 0.02);
        }
    }

    SECTION("alternating trace has lag-1 autocorrelation near -1") {
        std::vector<double> v(10'000);
        for (std::size_t t = 0; t < v.size(); ++t) {
            v[t] = (t % 2 == 0) ? 1.0 : -1.0;
        }
        CHECK_THAT(sample_acf(v, 1)[0], Catch::Matchers::WithinAbs(-1.0, 1e-3));
    }

    SECTION("AR(1) trace recovers its coefficient") {
        const auto v = ar1_trace(0.9, 100'000, 13);
        CHECK_THAT(sample_acf(v, 1)[0], Catch::Matchers::WithinAbs(0.9, 0.02));
    }

    SECTION("affine transforms leave the ACF unchanged") {
        const auto v = ar1_trace(0.5, 5'000, 29);
        std::vector<double> w(v);
        for (auto& x : w) {
            x = -3.7 * x + 11.0;
        }
        const auto a = sample_acf(v, 5);
        const auto b = sample_acf(w, 5);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK_THAT(a[k], Catch::Matchers::WithinAbs(b[k], 1e-10));
        }
    }

    SECTION("input validation") {
        const std::vector<double> constant(50, 2.0);
        CHECK_THROWS_AS(sample_acf(constant, 5), std::invalid_argument);
        const std::vector<double> shorter{1.0, 2.0, 3.0};
        CHECK_THROWS_AS(sample_acf(shorter, 3), std::invalid_argument);
    }
}

TEST_CASE("inefficiency factor", "[diagnostics]") {
    SECTION("iid trace concentrates near one") {
        RngState rng(31);
        std::vector<double> v(100'000);
        for (auto& x : v) {
            x = draw_standard_normal(rng);
        }
        CHECK_THAT(inefficiency_factor(v), Catch::Matchers::WithinAbs(1.0, 0.1));
    }

    SECTION("AR(1) with rho one half gives about three") {
        const auto v = ar1_trace(0.5, 100'000, 47);
        CHECK_THAT(inefficiency_factor(v), Catch::Matchers::WithinAbs(3.0, 0.3));
    }

    SECTION("always positive") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto v = ar1_trace(-0.8, 2'000, seed);
            CHECK(inefficiency_factor(v) > 0.0);
        }
    }

    SECTION("constant or short traces rejected") {
        const std::vector<double> constant(500, 1.0);
        CHECK_THROWS_AS(inefficiency_factor(constant), std::invalid_argument);
        const std::vector<double> shorter(50, 0.0);
        CHECK_THROWS_AS(inefficiency_factor(shorter), std::invalid_argument);
    }
}

TEST_CASE("posterior summary", "[diagnostics]") {
    SECTION("tiny trace") {
        const std::vector<double> v{1.0, 2.0, 3.0};
        const auto s = posterior_summary(v);
        CHECK(s.mean == 2.0);
        CHECK(s.median == 2.0);
        CHECK_THAT(s.sd, Catch::Matchers::WithinRel(1.0, 1e-12));
    }

    SECTION("single element collapses the quantiles") {
        const std::vector<double> v{4.2};
        const auto s = posterior_summary(v);
        CHECK(s.q025 == 4.2);
        CHECK(s.median == 4.2);
        CHECK(s.q975 == 4.2);
        CHECK(s.sd == 0.0);
    }

    SECTION("normal sample quantile") {
        RngState rng(88);
        std::vector<double> v(100'000);
        for (auto& x : v) {
            x = draw_standard_normal(rng);
        }
        const auto s = posterior_summary(v);
        CHECK_THAT(s.q975, Catch::Matchers::WithinAbs(1.96, 0.03));
        CHECK_THAT(s.q025, Catch::Matchers::WithinAbs(-1.96, 0.03));
    }

    SECTION("empty trace rejected") {
        const std::vector<double> v;
        CHECK_THROWS_AS(posterior_summary(v), std::invalid_argument);
    }
}

TEST_CASE("state band", "[diagnostics]") {
    SECTION("identical draws give a zero-width band") {
        const LatentPath path{0.1, -0.2, 0.5};
        const std::vector<LatentPath> draws(5, path);
        const auto band = state_band(draws, 0.95);
        for (std::size_t t = 0; t < path.size(); ++t) {
            CHECK(band.lower[t] == path[t]);
            CHECK(band.upper[t] == path[t]);
            CHECK_THAT(band.mean[t], Catch::Matchers::WithinAbs(path[t], 1e-14));
        }
    }

    SECTION("permutation invariance") {
        std::vector<LatentPath> draws{{0.0, 1.0}, {2.0, -1.0}, {1.0, 0.5}, {-0.5, 2.0}};
        auto shuffled = draws;
        std::rotate(shuffled.begin(), shuffled.begin() + 2, shuffled.end());
        const auto a = state_band(draws, 0.9);
        const auto b = state_band(shuffled, 0.9);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
        for (std::size_t t = 0; t < a.mean.size(); ++t) {
            CHECK_THAT(a.mean[t], Catch::Matchers::WithinAbs(b.mean[t], 1e-14));
        }
    }

    SECTION("band endpoints are the pointwise quantiles") {
        const std::size_t J = 40;
        std::vector<LatentPath> draws(J, LatentPath(3));
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t t = 0; t < 3; ++t) {
                draws[j][t] = static_cast<double>(j + 1);
            }
        }
        const auto band = state_band(draws, 0.95);
        std::vector<double> ladder(J);
        for (std::size_t j = 0; j < J; ++j) {
            ladder[j] = static_cast<double>(j + 1);
        }
        const double lo = 0.5 * (1.0 - 0.95);
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(band.lower[t] == quantile(ladder, lo));
            CHECK(band.upper[t] == quantile(ladder, 1.0 - lo));
        }
    }

    SECTION("ragged draws rejected") {
        std::vector<LatentPath> draws{{0.0, 1.0}, {2.0}};
        CHECK_THROWS_AS(state_band(draws, 0.95), std::invalid_argument);
    }
}

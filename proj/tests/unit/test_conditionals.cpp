#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pgsv/conditionals.hpp"
#include "pgsv/model.hpp"
#include "pgsv/rng.hpp"

using namespace pgsv;

TEST_CASE("sigma^2 posterior parameters", "[conditionals]") {
    SECTION("zero residual sum leaves the prior scale") {
        const LatentPath x{0.0, 0.0};
        const auto post = sigma2_posterior(0.3, x, IgPrior{2.0, 2.0});
        CHECK(post.shape == 2.0);
        CHECK(post.scale == 1.0);
    }

    SECTION("exact AR fit reduces to the prior-only scale") {
        const LatentPath x{1.0, 0.5};
        const auto post = sigma2_posterior(0.5, x, IgPrior{2.0, 2.0});
        CHECK(post.scale == 1.0);
    }

    SECTION("worked example") {
        const LatentPath x{0.0, 1.0, 0.0};
        const auto post = sigma2_posterior(0.0, x, IgPrior{4.0, 1.0});
        CHECK(post.shape == 3.5);
        // residuals at phi = 0 are (1, 0), so the scale is (1 + 1) / 2
        CHECK(post.scale == 1.0);
    }

    SECTION("n = 0 rejected") {
        const LatentPath x{1.0};
        CHECK_THROWS_AS(sigma2_posterior(0.5, x, IgPrior{2.0, 2.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("phi posterior parameters", "[conditionals]") {
    SECTION("flat path returns the prior") {
        const LatentPath x{0.0, 0.0, 0.0, 0.0};
        const auto post = phi_posterior(1.0, x, 0.4, 0.09);
        CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(0.4, 1e-14));
        CHECK_THAT(post.var, Catch::Matchers::WithinAbs(0.09, 1e-14));
    }

    SECTION("diffuse prior approaches the least-squares value") {
        const LatentPath x{1.0, 1.0, 1.0};
        const auto post = phi_posterior(1.0, x, 0.0, 1e12);
        CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(1.0, 1e-9));
    }

    SECTION("worked example") {
        const LatentPath x{1.0, 2.0};
        const auto post = phi_posterior(1.0, x, 0.0, 1.0);
        CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(1.0, 1e-14));
        CHECK_THAT(post.var, Catch::Matchers::WithinAbs(0.5, 1e-14));
    }
}

TEST_CASE("mu posterior parameters", "[conditionals]") {
    SECTION("constant path identifies the level") {
        for (double c : {-2.0, 0.7, 3.1}) {
            const LatentPath x(6, c);
            const auto post = mu_posterior(0.6, 1.3, x);
            CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(c, 1e-12));
        }
    }

    SECTION("phi = 0 gives the sample mean with variance 1/(n+1)") {
        const LatentPath x{0.2, -0.4, 1.0, 0.6};
        const auto post = mu_posterior(0.0, 1.0, x);
        const double xbar = (0.2 - 0.4 + 1.0 + 0.6) / 4.0;
        CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(xbar, 1e-14));
        CHECK_THAT(post.var, Catch::Matchers::WithinAbs(0.25, 1e-14));
    }

    SECTION("worked example") {
        const LatentPath x{1.0, 2.0};
        const auto post = mu_posterior(0.5, 1.0, x);
        CHECK_THAT(post.var, Catch::Matchers::WithinAbs(1.0, 1e-14));
        CHECK_THAT(post.mean, Catch::Matchers::WithinAbs(1.5, 1e-14));
    }

    SECTION("nonstationary phi rejected") {
        const LatentPath x{0.0, 1.0};
        CHECK_THROWS_AS(mu_posterior(1.0, 1.0, x), std::invalid_argument);
    }
}

TEST_CASE("beta^2 posterior parameters", "[conditionals]") {
    SECTION("zero returns leave the prior scale") {
        const std::vector<double> y{0.0, 0.0, 0.0};
        const LatentPath x{0.1, 0.5, -0.2, 0.3};
        const auto post = beta2_posterior(y, x, IgPrior{3.0, 1.4});
        CHECK(post.scale == 0.7);
        CHECK(post.shape == 0.5 * (3.0 + 3.0 + 1.0));
    }

    SECTION("unit volatility sums the squared returns") {
        const std::vector<double> y{1.0, -2.0};
        const LatentPath x{0.7, 0.0, 0.0};
        const auto post = beta2_posterior(y, x, IgPrior{2.0, 2.0});
        CHECK_THAT(post.scale, Catch::Matchers::WithinAbs(0.5 * (2.0 + 5.0), 1e-14));
    }

    SECTION("worked example") {
        const std::vector<double> y{1.0, 1.0};
        const LatentPath x{0.9, 0.0, std::log(4.0)};
        const auto post = beta2_posterior(y, x, IgPrior{2.0, 2.0});
        CHECK_THAT(post.shape, Catch::Matchers::WithinAbs(2.5, 1e-14));
        CHECK_THAT(post.scale, Catch::Matchers::WithinAbs(1.625, 1e-14));
    }

    SECTION("length mismatch rejected") {
        const std::vector<double> y{1.0, 1.0};
        const LatentPath x{0.0, 0.0};
        CHECK_THROWS_AS(beta2_posterior(y, x, IgPrior{2.0, 2.0}), std::invalid_argument);
    }
}

TEST_CASE("conjugate posteriors match an independent oracle on random instances",
          "[conditionals]") {
    RngState rng(112358);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
        LatentPath x(n + 1);
        for (auto& v : x) {
            v = 4.0 * rng.uniform() - 2.0;
        }
        std::vector<double> y(n);
        for (auto& v : y) {
            v = 4.0 * rng.uniform() - 2.0;
        }
        const double phi = 1.9 * rng.uniform() - 0.95;
        const double sigma = 0.2 + 2.0 * rng.uniform();
        const IgPrior ig{0.5 + 5.0 * rng.uniform(), 0.5 + 5.0 * rng.uniform()};
        const double pm = rng.uniform() - 0.5;
        const double pv = 0.05 + rng.uniform();

        // oracle: long-double transcription with reversed accumulation order
        long double rss = 0.0L;
        for (std::size_t t = n; t >= 1; --t) {
            const long double r = static_cast<long double>(x[t]) - phi * x[t - 1];
            rss += r * r;
        }
        const auto sp = sigma2_posterior(phi, x, ig);
        REQUIRE_THAT(sp.shape, Catch::Matchers::WithinRel(static_cast<double>(0.5L * (ig.a + n + 1.0L)), 1e-10));
        REQUIRE_THAT(sp.scale, Catch::Matchers::WithinRel(
                                   static_cast<double>(0.5L * (ig.b + rss)), 1e-10));

        long double sxx = 0.0L, sxy = 0.0L;
        for (std::size_t t = n; t >= 1; --t) {
            sxx += static_cast<long double>(x[t - 1]) * x[t - 1];
            sxy += static_cast<long double>(x[t]) * x[t - 1];
        }
        const long double binv = 1.0L / pv + sxx / (sigma * sigma);
        const long double bb = pm / pv + sxy / (sigma * sigma);
        const auto pp = phi_posterior(sigma, x, pm, pv);
        REQUIRE_THAT(pp.mean, Catch::Matchers::WithinRel(static_cast<double>(bb / binv), 1e-10));
        REQUIRE_THAT(pp.var, Catch::Matchers::WithinRel(static_cast<double>(1.0L / binv), 1e-10));

        long double rsum = 0.0L;
        for (std::size_t t = n; t >= 1; --t) {
            rsum += static_cast<long double>(x[t]) - phi * x[t - 1];
        }
        const long double mv =
            sigma * sigma /
            (n * (1.0L - phi) * (1.0L - phi) + (1.0L - static_cast<long double>(phi) * phi));
        const long double mm =
            mv * ((1.0L - static_cast<long double>(phi) * phi) * x[0] + (1.0L - phi) * rsum) /
            (static_cast<long double>(sigma) * sigma);
        const auto mp = mu_posterior(phi, sigma, x);
        REQUIRE_THAT(mp.mean, Catch::Matchers::WithinRel(static_cast<double>(mm), 1e-10));
        REQUIRE_THAT(mp.var, Catch::Matchers::WithinRel(static_cast<double>(mv), 1e-10));

        long double bsum = 0.0L;
        for (std::size_t t = n; t >= 1; --t) {
            bsum += static_cast<long double>(y[t - 1]) * y[t - 1] /
                    std::exp(static_cast<long double>(x[t]));
        }
        const auto bp = beta2_posterior(y, x, ig);
        REQUIRE_THAT(bp.shape, Catch::Matchers::WithinRel(static_cast<double>(0.5L * (ig.a + n + 1.0L)), 1e-10));
        REQUIRE_THAT(bp.scale, Catch::Matchers::WithinRel(
                                   static_cast<double>(0.5L * (ig.b + bsum)), 1e-10));
    }
}

TEST_CASE("adapter updates follow the recursion", "[conditionals]") {
    SECTION("lambda update worked example") {
        AdapterState a;
        a.lambda = 1.0;
        a.alpha_star = 0.234;
        const auto next = adapter_update(a, {0.0, 0.0}, 1.0, 0.5);
        CHECK_THAT(next.lambda, Catch::Matchers::WithinRel(std::exp(0.383), 1e-12));
    }

    SECTION("gamma = 1 replaces the covariance by the outer product") {
        AdapterState a;
        a.mean = {0.5, -0.2};
        a.cov = {0.3, 0.1, 0.1, 0.4};
        const std::array<double, 2> theta{1.5, 0.8};
        const auto next = adapter_update(a, theta, 0.4, 1.0);
        const double d0 = theta[0] - 0.5, d1 = theta[1] + 0.2;
        CHECK_THAT(next.cov[0], Catch::Matchers::WithinAbs(d0 * d0, 1e-14));
        CHECK_THAT(next.cov[1], Catch::Matchers::WithinAbs(d0 * d1, 1e-14));
        CHECK_THAT(next.cov[3], Catch::Matchers::WithinAbs(d1 * d1, 1e-14));
        CHECK_THAT(next.mean[0], Catch::Matchers::WithinAbs(theta[0], 1e-14));
        CHECK_THAT(next.mean[1], Catch::Matchers::WithinAbs(theta[1], 1e-14));
    }

    SECTION("covariance stays symmetric PSD along random trajectories") {
        RngState rng(902);
        for (int rep = 0; rep < 50; ++rep) {
            AdapterState a;
            for (int j = 1; j <= 200; ++j) {
                const std::array<double, 2> theta{3.0 * rng.uniform() - 1.5,
                                                  3.0 * rng.uniform() - 1.5};
                const double gamma = std::pow(static_cast<double>(j), -0.6);
                a = adapter_update(a, theta, rng.uniform(), gamma);
                REQUIRE(a.cov[1] == a.cov[2]);
                const double tr = a.cov[0] + a.cov[3];
                const double det = a.cov[0] * a.cov[3] - a.cov[1] * a.cov[2];
                // eigenvalues of a symmetric 2x2 are nonnegative iff
                // trace >= 0 and det >= 0 (up to roundoff)
                REQUIRE(tr >= 0.0);
                REQUIRE(det >= -1e-12 * (1.0 + tr * tr));
            }
        }
    }
}

TEST_CASE("random walk Metropolis step", "[conditionals]") {
    PriorSpec prior;
    const LatentPath x{0.3, -0.4, 0.6};
    const double mu = 0.0;

    SECTION("uphill proposals are always accepted") {
        AdapterState a;
        RngState rng(41);
        std::array<double, 2> theta{0.9, 0.3};
        int uphill_seen = 0;
        double g_cur = joint_theta_logdensity(theta[0], theta[1], mu, x, prior);
        for (int i = 0; i < 300; ++i) {
            const auto res = rwm_joint_step(theta, mu, x, prior, a, false, rng);
            if (res.accepted) {
                const double g_new =
                    joint_theta_logdensity(res.theta[0], res.theta[1], mu, x, prior);
                if (g_new >= g_cur) {
                    ++uphill_seen;
                    REQUIRE(res.alpha == 1.0);
                }
                g_cur = g_new;
            }
            theta = res.theta;
        }
        CHECK(uphill_seen > 10);
    }

    SECTION("non-adaptive step leaves the adapter unchanged") {
        AdapterState a;
        a.lambda = 0.7;
        a.mean = {0.9, 0.3};
        RngState rng(42);
        const auto res = rwm_joint_step({0.9, 0.3}, mu, x, prior, a, false, rng);
        CHECK(res.adapter.lambda == a.lambda);
        CHECK(res.adapter.cov == a.cov);
        CHECK(res.adapter.mean == a.mean);
        CHECK(res.adapter.step_index == a.step_index);
    }

    SECTION("corrupt chain state is reported") {
        AdapterState a;
        RngState rng(43);
        CHECK_THROWS_AS(rwm_joint_step({1.5, 1.0}, mu, x, prior, a, false, rng),
                        std::runtime_error);
    }

    SECTION("invalid adapter rejected") {
        AdapterState a;
        a.lambda = -1.0;
        RngState rng(44);
        CHECK_THROWS_AS(rwm_joint_step({0.9, 0.3}, mu, x, prior, a, true, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("non-adaptive chain matches the target on a fixed tiny path",
          "[conditionals][slow]") {
    PriorSpec prior;
    const LatentPath x{0.3, -0.4, 0.6};
    const double mu = 0.0;

    // 2-D reference masses by direct evaluation of the unnormalized target
    const int K = 60;
    const double phi_lo = 0.55, phi_hi = 1.0;
    const double sig_lo = -0.45, sig_hi = 0.85;
    const double hp = (phi_hi - phi_lo) / K, hs = (sig_hi - sig_lo) / K;
    std::vector<double> ref(K * K, 0.0);
    double total = 0.0;
    for (int i = 0; i < K; ++i) {
        const double phi = phi_lo + (i + 0.5) * hp;
        for (int j = 0; j < K; ++j) {
            const double sig = sig_lo + (j + 0.5) * hs;
            if (sig == 0.0) {
                continue;
            }
            const double g = joint_theta_logdensity(phi, sig, mu, x, prior);
            ref[i * K + j] = std::exp(g);
            total += ref[i * K + j];
        }
    }
    for (auto& v : ref) {
        v /= total;
    }

    AdapterState a;
    a.cov = {0.004, 0.0, 0.0, 0.02};
    RngState rng(7321);
    std::array<double, 2> theta{0.9, 0.2};
    std::vector<double> hist(K * K, 0.0);
    const int steps = 1'000'000;
    int inside = 0;
    for (int s = 0; s < steps; ++s) {
        const auto res = rwm_joint_step(theta, mu, x, prior, a, false, rng);
        theta = res.theta;
        const int i = static_cast<int>((theta[0] - phi_lo) / hp);
        const int j = static_cast<int>((theta[1] - sig_lo) / hs);
        if (i >= 0 && i < K && j >= 0 && j < K) {
            hist[i * K + j] += 1.0;
            ++inside;
        }
    }
    // nearly all mass lies in the window
    REQUIRE(static_cast<double>(inside) / steps > 0.99);
    for (auto& v : hist) {
        v /= static_cast<double>(steps);
    }
    double tv = 0.0;
    for (int c = 0; c < K * K; ++c) {
        tv += std::fabs(hist[c] - ref[c]);
    }
    tv *= 0.5;
    CHECK(tv < 0.05);
}

#include "cadence/errors.hpp"
#include "cadence/inference.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace cadence;

namespace {

std::vector<double> pooled(const PosteriorSamples& post, std::size_t coef) {
    std::vector<double> out;
    for (const auto& chain : post.coordinate(coef)) {
        out.insert(out.end(), chain.begin(), chain.end());
    }
    return out;
}

std::vector<std::vector<double>> iid_chains(oracle::Gen& gen, std::size_t chains, std::size_t draws) {
    std::vector<std::vector<double>> out(chains);
    for (auto& c : out) {
        c = gen.normals(draws);
    }
    return out;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
}

} // namespace

TEST_SUITE("log_prior") {
    TEST_CASE("standard normal at zero") {
        CHECK(std::abs(log_prior({{0.0}, {1.0}}, std::vector{0.0}) + 0.918939) < 1e-6);
    }

    TEST_CASE("at the mean only normalising terms remain") {
        const GaussianPrior prior{{1.0, -2.0, 0.5}, {0.3, 2.0, 1.1}};
        double expected = 0.0;
        for (double s : prior.sigma) {
            expected -= std::log(s * std::sqrt(2.0 * std::numbers::pi));
        }
        CHECK(std::abs(log_prior(prior, prior.mu) - expected) < 1e-12);
    }

    TEST_CASE("reference prior at its mean") {
        const auto ref = GaussianPrior::reference();
        double expected = -2.0 * std::log(2.0 * std::numbers::pi);
        for (double s : ref.sigma) {
            expected -= std::log(s);
        }
        CHECK(std::abs(expected - (-1.358813084443903)) < 1e-12);
        CHECK(std::abs(log_prior(ref, ref.mu) - expected) < 1e-12);
    }

    TEST_CASE("length mismatch") {
        CHECK_THROWS_AS((void)log_prior(GaussianPrior::reference(), std::vector{1.0, 2.0}), ArgumentError);
    }
}

TEST_SUITE("log_posterior") {
    const GaussianPrior prior{{1.0, 0.2}, {0.5, 0.1}};

    TEST_CASE("zero-width window reduces to the prior") {
        const std::vector<double> beta{1.3, 0.1};
        CHECK(log_posterior(prior, {}, 0.0, beta) == log_prior(prior, beta));
    }

    TEST_CASE("prior plus likelihood on the history window") {
        const std::vector<double> beta{1.3, 0.1};
        const std::vector<double> hist{0.4, 1.9, 2.5};
        const double expected = log_prior(prior, beta) + log_likelihood(PolynomialIntensity(beta), hist, {0.0, 3.0});
        CHECK(std::abs(log_posterior(prior, hist, 3.0, beta) - expected) < 1e-12);
    }

    TEST_CASE("history beyond the cutoff is rejected") {
        CHECK_THROWS_AS((void)log_posterior(prior, std::vector{3.5}, 3.0, std::vector{1.0, 0.0}), ArgumentError);
    }

    TEST_CASE("a very tight prior puts the mode at its mean") {
        const GaussianPrior tight{{1.0, 0.2}, {1e-6, 1e-6}};
        const std::vector<double> hist{0.4, 1.9, 2.5};
        const double at_mean = log_posterior(tight, hist, 3.0, tight.mu);
        oracle::Gen gen(41);
        for (int k = 0; k < 50; ++k) {
            std::vector<double> moved{1.0 + gen.normal(0.0, 1e-4), 0.2 + gen.normal(0.0, 1e-4)};
            CHECK(log_posterior(tight, hist, 3.0, moved) < at_mean);
        }
    }
}

TEST_SUITE("sample_posterior") {
    const LogDensity std_normal = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
    const std::vector<double> zero{0.0};
    const std::vector<double> unit{1.0};

    TEST_CASE("one-dimensional standard normal") {
        const auto post = sample_posterior(std_normal, zero, unit, SamplerConfig{});
        const auto draws = pooled(post, 0);
        REQUIRE(draws.size() == 4000);
        CHECK(std::abs(oracle::mean(draws)) < 0.05);
        CHECK(std::abs(oracle::variance(draws) - 1.0) < 0.15);
        CHECK(post.r_hat[0] < 1.05);
        CHECK(post.ess[0] > 500.0);
        CHECK(post.acceptance.size() == 4);
        CHECK(post.warnings.empty());
    }

    TEST_CASE("correlated two-dimensional Gaussian") {
        const double rho = 0.8;
        const LogDensity target = [rho](std::span<const double> x) {
            return -0.5 * (x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / (1.0 - rho * rho);
        };
        SamplerConfig cfg;
        cfg.seed = 7;
        const auto post = sample_posterior(target, std::vector{0.0, 0.0}, std::vector{1.0, 1.0}, cfg);
        const auto a = pooled(post, 0);
        const auto b = pooled(post, 1);
        const double ma = oracle::mean(a);
        const double mb = oracle::mean(b);
        double cov = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            cov += (a[i] - ma) * (b[i] - mb);
        }
        cov /= static_cast<double>(a.size() - 1);
        const double corr = cov / std::sqrt(oracle::variance(a) * oracle::variance(b));
        CHECK(std::abs(corr - rho) < 0.1);
    }

    TEST_CASE("symmetric target: mean within three standard errors of the mode") {
        const LogDensity laplace = [](std::span<const double> x) { return -std::abs(x[0]); };
        SamplerConfig cfg;
        cfg.seed = 3;
        const auto post = sample_posterior(laplace, zero, unit, cfg);
        const auto draws = pooled(post, 0);
        const double se = std::sqrt(oracle::variance(draws) / post.ess[0]);
        CHECK(std::abs(oracle::mean(draws)) < 3.0 * se);
    }

    TEST_CASE("same configuration gives bit-identical draws, threaded or not") {
        SamplerConfig cfg;
        cfg.seed = 1234;
        cfg.draws = 300;
        cfg.warmup = 300;
        const auto a = sample_posterior(std_normal, zero, unit, cfg);
        const auto b = sample_posterior(std_normal, zero, unit, cfg);
        cfg.parallel = false;
        const auto c = sample_posterior(std_normal, zero, unit, cfg);
        CHECK(a.values == b.values);
        CHECK(a.values == c.values);
        cfg.seed = 1235;
        CHECK(sample_posterior(std_normal, zero, unit, cfg).values != a.values);
    }

    TEST_CASE("non-finite density at the start is an initialisation error") {
        const LogDensity nowhere = [](std::span<const double>) { return -std::numeric_limits<double>::infinity(); };
        CHECK_THROWS_AS((void)sample_posterior(nowhere, zero, unit, SamplerConfig{}), InitializationError);
    }

    TEST_CASE("invalid configuration") {
        SamplerConfig cfg;
        cfg.chains = 0;
        CHECK_THROWS_AS((void)sample_posterior(std_normal, zero, unit, cfg), ArgumentError);
        cfg = SamplerConfig{};
        cfg.target_acceptance = 1.5;
        CHECK_THROWS_AS((void)sample_posterior(std_normal, zero, unit, cfg), ArgumentError);
        CHECK_THROWS_AS((void)sample_posterior(std_normal, zero, std::vector{0.0}, SamplerConfig{}), ArgumentError);
        CHECK_THROWS_AS((void)sample_posterior(std_normal, zero, std::vector{1.0, 1.0}, SamplerConfig{}),
                        ArgumentError);
    }

    TEST_CASE("acceptance target defaults depend on dimension") {
        SamplerConfig cfg;
        CHECK(cfg.acceptance_target(1) == 0.44);
        CHECK(cfg.acceptance_target(4) == 0.234);
        cfg.target_acceptance = 0.3;
        CHECK(cfg.acceptance_target(1) == 0.3);
    }

    TEST_CASE("too few draws leaves diagnostics undefined with a warning") {
        SamplerConfig cfg;
        cfg.chains = 1;
        cfg.draws = 10;
        cfg.warmup = 10;
        const auto post = sample_posterior(std_normal, zero, unit, cfg);
        CHECK(std::isnan(post.r_hat[0]));
        CHECK(std::isnan(post.ess[0]));
        CHECK(std::isnan(post.max_r_hat()));
        CHECK_FALSE(post.warnings.empty());
    }

    TEST_CASE("posterior concentrates on the generating coefficients") {
        // Linear intensity; history on [0, 3] versus [0, 12].
        const std::vector<double> truth{1.5, 0.4};
        const GaussianPrior prior{{2.0, 0.2}, {1.5, 0.5}};
        oracle::Gen gen(42);
        double error_short = 0.0;
        double error_long = 0.0;
        for (double span : {3.0, 12.0}) {
            int covered = 0;
            int total = 0;
            double error = 0.0;
            for (int k = 0; k < 50; ++k) {
                const auto hist = simulate_thinning(PolynomialIntensity(truth), {0.0, span}, gen.rng());
                const LogDensity target = [&](std::span<const double> beta) {
                    return log_posterior(prior, hist, span, beta);
                };
                SamplerConfig cfg;
                cfg.seed = static_cast<std::uint64_t>(k);
                const auto post = sample_posterior(target, prior.mu, prior.sigma, cfg);
                for (std::size_t j = 0; j < 2; ++j) {
                    const auto d = pooled(post, j);
                    covered += (quantile(d, 0.025) <= truth[j] && truth[j] <= quantile(d, 0.975)) ? 1 : 0;
                    ++total;
                    error += std::abs(oracle::mean(d) - truth[j]);
                }
            }
            CHECK(static_cast<double>(covered) / total >= 0.8);
            (span == 3.0 ? error_short : error_long) = error;
        }
        CHECK(error_long < error_short);
    }
}

TEST_SUITE("r_hat") {
    TEST_CASE("iid chains") {
        oracle::Gen gen(43);
        const double r = r_hat(iid_chains(gen, 4, 1000));
        CHECK(r >= 0.99);
        CHECK(r <= 1.01);
    }

    TEST_CASE("one offset chain") {
        oracle::Gen gen(44);
        auto chains = iid_chains(gen, 4, 1000);
        for (double& x : chains[2]) {
            x += 100.0;
        }
        CHECK(r_hat(chains) > 2.0);
    }

    TEST_CASE("constant identical draws") {
        CHECK(r_hat(std::vector<std::vector<double>>(4, std::vector<double>(100, 3.0))) == 1.0);
    }

    TEST_CASE("too few chains or draws") {
        CHECK_THROWS_AS((void)r_hat({{1.0, 2.0, 3.0, 4.0}}), ArgumentError);
        CHECK_THROWS_AS((void)r_hat({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}}), ArgumentError);
        CHECK_THROWS_AS((void)r_hat({{1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0}}), ArgumentError);
    }
}

TEST_SUITE("ess") {
    TEST_CASE("iid draws") {
        oracle::Gen gen(45);
        const auto e = ess(iid_chains(gen, 4, 1000));
        CHECK(e.value >= 3000.0);
        CHECK(e.value <= 4000.0);
        CHECK_FALSE(e.degenerate);
    }

    TEST_CASE("AR(1) draws") {
        oracle::Gen gen(46);
        const double phi = 0.9;
        std::vector<std::vector<double>> chains(4, std::vector<double>(1000));
        for (auto& c : chains) {
            double x = gen.normal(0.0, 1.0 / std::sqrt(1.0 - phi * phi));
            for (double& v : c) {
                x = phi * x + gen.normal();
                v = x;
            }
        }
        const double expected = 4000.0 * (1.0 - phi) / (1.0 + phi);
        CHECK(std::abs(ess(chains).value - expected) <= 0.3 * expected);
    }

    TEST_CASE("constant draws are capped and flagged") {
        const auto e = ess(std::vector<std::vector<double>>(4, std::vector<double>(100, 1.0)));
        CHECK(e.degenerate);
        CHECK(e.value == 400.0);
    }

    TEST_CASE("too few draws") {
        CHECK_THROWS_AS((void)ess({{1.0, 2.0}}), ArgumentError);
        CHECK_THROWS_AS((void)ess({}), ArgumentError);
    }
}

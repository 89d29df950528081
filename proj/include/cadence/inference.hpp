#pragma once

// Bayesian posterior over intensity coefficients: Gaussian prior, NHPP
// log-posterior, multi-chain adaptive random-walk Metropolis and the split
// R-hat / ESS convergence diagnostics.

#include "cadence/point_process.hpp"
#include "cadence/prior.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cadence {

[[nodiscard]] double log_prior(const GaussianPrior& prior, std::span<const double> beta);

// log_prior(beta) + NHPP log-likelihood of `history` on [0, t_c]. A
// zero-width window contributes only the log-intensity terms of its arrivals.
[[nodiscard]] double log_posterior(const GaussianPrior& prior, std::span<const double> history, double t_c,
                                   std::span<const double> beta, double clamp_floor = kDefaultClampFloor);

// Must be reentrant: chains call it concurrently.
using LogDensity = std::function<double(std::span<const double>)>;

struct SamplerConfig {
    std::size_t chains{4};
    std::size_t draws{1000};
    std::size_t warmup{1000};
    std::uint64_t seed{0};
    double step_fraction{0.1};  // initial proposal sd as a fraction of the per-coordinate scale
    // Unset means 0.44 for a one-dimensional target and 0.234 otherwise.
    std::optional<double> target_acceptance;
    bool parallel{true};

    void validate() const;
    [[nodiscard]] double acceptance_target(std::size_t dimension) const;
};

struct PosteriorSamples {
    std::size_t chains{};
    std::size_t draws{};
    std::size_t dimension{};
    std::vector<double> values;       // [chain][draw][coefficient]
    std::vector<double> acceptance;   // post-warmup acceptance rate per chain
    std::vector<double> r_hat;        // per coefficient, NaN when too few draws
    std::vector<double> ess;          // per coefficient, NaN when too few draws
    std::vector<std::string> warnings;

    [[nodiscard]] double at(std::size_t chain, std::size_t draw, std::size_t coef) const {
        return values[(chain * draws + draw) * dimension + coef];
    }
    [[nodiscard]] std::vector<std::vector<double>> coordinate(std::size_t coef) const;
    [[nodiscard]] double max_r_hat() const;
    [[nodiscard]] CoefficientDraws as_coefficient_draws(double clamp_floor) const;
};

// Chain c starts at `center` jittered by 0.1 * scale from its own seed
// substream. Proposal scales start at step_fraction * scale and adapt during
// warmup; adaptation is frozen afterwards. Throws InitializationError when
// the density is not finite at a starting point.
[[nodiscard]] PosteriorSamples sample_posterior(const LogDensity& log_density, std::span<const double> center,
                                                std::span<const double> scale, const SamplerConfig& config);

// Split R-hat for one coefficient; input is chains x draws.
[[nodiscard]] double r_hat(const std::vector<std::vector<double>>& chains);

struct EssEstimate {
    double value{};
    bool degenerate{false};  // zero variance: value is capped at the draw count
};

// Multi-chain autocorrelation ESS with Geyer initial-positive-sequence truncation.
[[nodiscard]] EssEstimate ess(const std::vector<std::vector<double>>& chains);

} // namespace cadence

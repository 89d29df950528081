#pragma once

// Non-homogeneous Poisson process core: likelihood, thinning simulation and
// the survival machinery behind next-arrival prediction.

#include "cadence/intensity.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cadence {

struct ObservationWindow {
    double start{0.0};
    double end{1.0};

    ObservationWindow() = default;
    ObservationWindow(double start_, double end_);  // throws ArgumentError unless start < end
};

// sum_i log lambda(T_i) - Lambda(window). Arrivals must lie inside the window
// (closed at both ends) and be strictly increasing.
[[nodiscard]] double log_likelihood(const PolynomialIntensity& model, std::span<const double> arrivals,
                                    const ObservationWindow& window);

inline constexpr double kThinningSafety = 1.05;

// Max of the clamped intensity on a 4096-interval grid over the window.
[[nodiscard]] double grid_max_intensity(const PolynomialIntensity& model, const ObservationWindow& window);

// Lewis-Shedler thinning against a constant dominating rate. Deterministic given the seed.
[[nodiscard]] std::vector<double> simulate_thinning(const PolynomialIntensity& model, const ObservationWindow& window,
                                                    std::uint64_t seed);

// Probability of no arrival in (t_c, t_c + u].
[[nodiscard]] double next_arrival_survival(const PolynomialIntensity& model, double t_c, double u);

struct ArrivalPrediction {
    double cutoff{};   // t_c, window coordinates
    double horizon{};  // search span after t_c
    std::optional<double> point;  // median of the next arrival
    std::optional<double> lower95;
    std::optional<double> upper95;
    bool censored{false};
    double restricted_mean{};  // t_c + integral of the mixture survival over [0, horizon]
};

// Coefficient draws sharing one clamp floor, flattened row-major.
struct CoefficientDraws {
    std::size_t dimension{};
    std::vector<double> values;
    double clamp_floor{kDefaultClampFloor};

    [[nodiscard]] std::size_t count() const noexcept { return dimension == 0 ? 0 : values.size() / dimension; }
    [[nodiscard]] std::span<const double> draw(std::size_t i) const {
        return std::span(values).subspan(i * dimension, dimension);
    }
};

// Posterior mixture of next-arrival survival curves; median and central 95%
// interval located by bisection on [0, horizon]. Quantiles past the horizon
// are reported absent, and the prediction is censored when the mixture
// survival at the horizon exceeds one half.
[[nodiscard]] ArrivalPrediction mixture_next_arrival(const CoefficientDraws& draws, double t_c, double horizon);

// Evaluates the mixture survival used above at offset u (no tabulation).
[[nodiscard]] double mixture_survival(const CoefficientDraws& draws, double t_c, double u);

} // namespace cadence

#pragma once

// Polynomial intensity family, its clamped integral, event binning and the
// ridge fit used to extract coefficient priors from historical events.

#include "cadence/cdm_ingest.hpp"
#include "cadence/prior.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cadence {

inline constexpr double kDefaultClampFloor = 1e-6;
inline constexpr std::size_t kQuadratureIntervals = 4096;

// lambda(t) = sum_j beta_j t^j, clamped below at `clamp_floor` CDMs/day.
// Coefficients are in ascending power order.
class PolynomialIntensity {
public:
    PolynomialIntensity() = default;
    explicit PolynomialIntensity(std::vector<double> coefficients, double clamp_floor = kDefaultClampFloor);

    [[nodiscard]] std::size_t degree() const noexcept { return coefficients_.size() - 1; }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double clamp_floor() const noexcept { return clamp_floor_; }

    // Unclamped polynomial value (Horner).
    [[nodiscard]] double raw(double t) const noexcept {
        double acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
            acc = acc * t + *it;
        }
        return acc;
    }

    [[nodiscard]] double operator()(double t) const noexcept {
        const double v = raw(t);
        return v > clamp_floor_ ? v : clamp_floor_;
    }

private:
    std::vector<double> coefficients_{0.0};
    double clamp_floor_{kDefaultClampFloor};
};

[[nodiscard]] inline double eval_intensity(const PolynomialIntensity& model, double t) { return model(t); }

// Integral of the clamped intensity over [a, b]: composite trapezoid on a
// uniform 4096-interval grid. Throws ArgumentError when a > b.
[[nodiscard]] double cumulative_intensity(const PolynomialIntensity& model, double a, double b);

// Cumulative integral of the clamped intensity tabulated from `start` on
// uniform Simpson panels. Inside a panel the intensity is replaced by its
// quadratic interpolant through the panel ends and midpoint, which is exact
// for polynomials up to degree three away from the clamp.
class CumulativeTable {
public:
    CumulativeTable(const PolynomialIntensity& model, double start, double span, std::size_t panels = 256);

    // Integral over [start, start + u], u clipped to [0, span].
    [[nodiscard]] double operator()(double u) const noexcept;
    [[nodiscard]] double span() const noexcept { return span_; }
    [[nodiscard]] double total() const noexcept { return cumulative_.back(); }

private:
    double span_;
    double step_;
    std::vector<double> edge_rate_;
    std::vector<double> mid_rate_;
    std::vector<double> cumulative_;
};

struct BinnedCounts {
    std::vector<double> edges;         // strictly increasing, size = bins + 1
    std::vector<std::size_t> counts;   // size = bins

    [[nodiscard]] std::size_t bins() const noexcept { return counts.size(); }
    [[nodiscard]] double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    [[nodiscard]] double midpoint(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    [[nodiscard]] std::size_t total() const noexcept;
};

struct RidgeConfig {
    double alpha{1.0};
    std::size_t degree{3};
    double bin_width{0.5};
};

// Pools arrivals from events sharing one window into bins [t_i, t_{i+1}),
// the last bin closed on the right and possibly narrower than bin_width.
[[nodiscard]] BinnedCounts bin_events(std::span<const ConjunctionEvent> events, double bin_width);

// Minimises sum_i [N_i / n_events - lambda(tbar_i) dt_i]^2 + alpha * sum_j beta_j^2
// through the regularised normal equations. Throws NumericalError when the
// system is singular.
[[nodiscard]] std::vector<double> fit_ridge(const BinnedCounts& binned, const RidgeConfig& config,
                                            std::size_t n_events);

// The ridge objective above, evaluated at `beta`.
[[nodiscard]] double ridge_objective(const BinnedCounts& binned, std::span<const double> beta, double alpha,
                                     std::size_t n_events);

// Bins one event on its own and fits it.
[[nodiscard]] std::vector<double> fit_event(const ConjunctionEvent& event, const RidgeConfig& config);

// Per-coordinate sample mean and (n-1) standard deviation, floored at sigma_floor.
[[nodiscard]] GaussianPrior prior_from_fit(const std::vector<std::vector<double>>& per_event_coefficients,
                                           double sigma_floor);

} // namespace cadence

#include "cadence/point_process.hpp"

#include "cadence/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cadence {

ObservationWindow::ObservationWindow(double start_, double end_) : start(start_), end(end_) {
    if (!(start < end) || !std::isfinite(start) || !std::isfinite(end)) {
        throw ArgumentError("observation window needs finite start < end");
    }
}

double log_likelihood(const PolynomialIntensity& model, std::span<const double> arrivals,
                      const ObservationWindow& window) {
    double sum = 0.0;
    double previous = -std::numeric_limits<double>::infinity();
    for (const double t : arrivals) {
        if (t < window.start || t > window.end) {
            throw ArgumentError("log_likelihood: arrival outside the observation window");
        }
        if (!(t > previous)) {
            throw ArgumentError("log_likelihood: arrivals must be strictly increasing");
        }
        previous = t;
        sum += std::log(model(t));
    }
    return sum - cumulative_intensity(model, window.start, window.end);
}

double grid_max_intensity(const PolynomialIntensity& model, const ObservationWindow& window) {
    const double h = (window.end - window.start) / static_cast<double>(kQuadratureIntervals);
    double peak = model.clamp_floor();
    for (std::size_t i = 0; i <= kQuadratureIntervals; ++i) {
        peak = std::max(peak, model(window.start + static_cast<double>(i) * h));
    }
    return peak;
}

std::vector<double> simulate_thinning(const PolynomialIntensity& model, const ObservationWindow& window,
                                      std::uint64_t seed) {
    const double rate_max = kThinningSafety * grid_max_intensity(model, window);
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> accepted;
    double t = window.start;
    while (true) {
        t += gap(rng);
        if (t > window.end) {
            break;
        }
        // Grid error could leave lambda(t) above rate_max; such candidates are always kept.
        if (unit(rng) * rate_max <= model(t)) {
            if (accepted.empty() || t > accepted.back()) {
                accepted.push_back(t);
            }
        }
    }
    return accepted;
}

double next_arrival_survival(const PolynomialIntensity& model, double t_c, double u) {
    if (!(u >= 0.0)) {
        throw ArgumentError("next_arrival_survival: u must be non-negative");
    }
    return std::exp(-cumulative_intensity(model, t_c, t_c + u));
}

double mixture_survival(const CoefficientDraws& draws, double t_c, double u) {
    if (draws.count() == 0) {
        throw ArgumentError("mixture_survival: no draws");
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < draws.count(); ++s) {
        const auto coef = draws.draw(s);
        sum += next_arrival_survival(PolynomialIntensity({coef.begin(), coef.end()}, draws.clamp_floor), t_c, u);
    }
    return sum / static_cast<double>(draws.count());
}

namespace {

// Smallest u in [0, span] with survival(u) <= level, for a nonincreasing survival.
template <typename Survival>
double bisect_level(const Survival& survival, double span, double level) {
    double lo = 0.0;
    double hi = span;
    for (int iter = 0; iter < 60 && hi - lo > 1e-10; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (survival(mid) > level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

ArrivalPrediction mixture_next_arrival(const CoefficientDraws& draws, double t_c, double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ArgumentError("mixture_next_arrival: horizon must be positive");
    }
    if (draws.count() == 0) {
        throw ArgumentError("mixture_next_arrival: no posterior draws");
    }
    std::vector<CumulativeTable> tables;
    tables.reserve(draws.count());
    for (std::size_t s = 0; s < draws.count(); ++s) {
        const auto coef = draws.draw(s);
        tables.emplace_back(PolynomialIntensity({coef.begin(), coef.end()}, draws.clamp_floor), t_c, horizon);
    }
    const auto survival = [&tables](double u) {
        double sum = 0.0;
        for (const auto& table : tables) {
            sum += std::exp(-table(u));
        }
        return sum / static_cast<double>(tables.size());
    };

    ArrivalPrediction out;
    out.cutoff = t_c;
    out.horizon = horizon;
    const double tail = survival(horizon);
    out.censored = tail > 0.5;

    const auto quantile = [&](double level) -> std::optional<double> {
        if (tail > level) {
            return std::nullopt;
        }
        return t_c + bisect_level(survival, horizon, level);
    };
    out.point = quantile(0.5);
    out.lower95 = quantile(0.975);
    out.upper95 = quantile(0.025);

    // Restricted mean via Simpson's rule on the mixture survival.
    constexpr std::size_t kPanels = 512;
    const double h = horizon / kPanels;
    double acc = survival(0.0) + tail;
    for (std::size_t i = 1; i < kPanels; ++i) {
        acc += (i % 2 == 1 ? 4.0 : 2.0) * survival(static_cast<double>(i) * h);
    }
    out.restricted_mean = t_c + acc * h / 3.0;
    return out;
}

} // namespace cadence

#include "cadence/intensity.hpp"

#include "cadence/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace cadence {

PolynomialIntensity::PolynomialIntensity(std::vector<double> coefficients, double clamp_floor)
    : coefficients_(std::move(coefficients)), clamp_floor_(clamp_floor) {
    if (coefficients_.empty()) {
        throw ArgumentError("intensity needs at least one coefficient");
    }
    if (!(clamp_floor_ > 0.0) || !std::isfinite(clamp_floor_)) {
        throw ArgumentError("clamp floor must be positive");
    }
}

namespace {

constexpr std::size_t kMaxClosedFormDegree = 12;
constexpr std::size_t kDirectNodeCount = 32;

// prefix[n][k] = sum_{m=0}^{n} m^k for n up to the grid size.
using PowerSums = std::array<double, kMaxClosedFormDegree + 1>;

const std::vector<PowerSums>& grid_power_sums() {
    static const auto table = [] {
        std::vector<PowerSums> out(kQuadratureIntervals + 1);
        std::array<long double, kMaxClosedFormDegree + 1> running{};
        for (std::size_t n = 0; n <= kQuadratureIntervals; ++n) {
            long double p = 1.0L;
            for (std::size_t k = 0; k <= kMaxClosedFormDegree; ++k) {
                running[k] += p;
                out[n][k] = static_cast<double>(running[k]);
                p *= static_cast<long double>(n);
            }
        }
        return out;
    }();
    return table;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

// Coefficients of s -> p(a + s).
std::vector<double> shifted_coefficients(std::span<const double> beta, double a) {
    std::vector<double> out(beta.size(), 0.0);
    for (std::size_t j = 0; j < beta.size(); ++j) {
        double a_pow = 1.0;
        for (std::size_t k = j + 1; k-- > 0;) {
            out[k] += beta[j] * binomial(j, k) * a_pow;
            a_pow *= a;
        }
    }
    return out;
}

// Bernstein coefficients bound the polynomial from below on [a, a + width].
bool bounded_below(std::span<const double> shifted, double width, double floor) {
    const std::size_t d = shifted.size() - 1;
    std::vector<double> scaled(shifted.size());
    double w_pow = 1.0;
    for (std::size_t k = 0; k <= d; ++k) {
        scaled[k] = shifted[k] * w_pow;
        w_pow *= width;
    }
    for (std::size_t i = 0; i <= d; ++i) {
        double b = 0.0;
        for (std::size_t k = 0; k <= i; ++k) {
            b += binomial(i, k) / binomial(d, k) * scaled[k];
        }
        if (!(b >= floor)) {
            return false;
        }
    }
    return true;
}

struct GridSum {
    const PolynomialIntensity& model;
    double a;
    double h;

    double direct(std::size_t i0, std::size_t i1) const {
        double sum = 0.0;
        for (std::size_t i = i0; i <= i1; ++i) {
            sum += model(a + static_cast<double>(i) * h);
        }
        return sum;
    }

    // Sum of the clamped intensity over nodes i0..i1. Ranges where the clamp
    // is provably inactive reduce to power sums of the node offset.
    double operator()(std::size_t i0, std::size_t i1) const {
        if (i1 - i0 + 1 <= kDirectNodeCount) {
            return direct(i0, i1);
        }
        const std::size_t n = i1 - i0;
        const auto shifted = shifted_coefficients(model.coefficients(), a + static_cast<double>(i0) * h);
        if (bounded_below(shifted, static_cast<double>(n) * h, model.clamp_floor())) {
            const auto& sums = grid_power_sums()[n];
            double total = 0.0;
            double h_pow = 1.0;
            for (std::size_t k = 0; k < shifted.size(); ++k) {
                total += shifted[k] * h_pow * sums[k];
                h_pow *= h;
            }
            return total;
        }
        const std::size_t mid = i0 + n / 2;
        return (*this)(i0, mid) + (*this)(mid + 1, i1);
    }
};

} // namespace

double cumulative_intensity(const PolynomialIntensity& model, double a, double b) {
    if (a > b) {
        throw ArgumentError("cumulative_intensity: lower bound exceeds upper bound");
    }
    if (a == b) {
        return 0.0;
    }
    const double h = (b - a) / static_cast<double>(kQuadratureIntervals);
    const GridSum grid{model, a, h};
    const double nodes = model.degree() <= kMaxClosedFormDegree ? grid(0, kQuadratureIntervals)
                                                                 : grid.direct(0, kQuadratureIntervals);
    return h * (nodes - 0.5 * (model(a) + model(b)));
}

CumulativeTable::CumulativeTable(const PolynomialIntensity& model, double start, double span, std::size_t panels)
    : span_(span), step_(span / static_cast<double>(panels)), edge_rate_(panels + 1), mid_rate_(panels),
      cumulative_(panels + 1) {
    if (!(span > 0.0) || panels == 0) {
        throw ArgumentError("cumulative table needs a positive span");
    }
    for (std::size_t k = 0; k <= panels; ++k) {
        edge_rate_[k] = model(start + static_cast<double>(k) * step_);
    }
    for (std::size_t k = 0; k < panels; ++k) {
        mid_rate_[k] = model(start + (static_cast<double>(k) + 0.5) * step_);
    }
    cumulative_[0] = 0.0;
    for (std::size_t k = 1; k <= panels; ++k) {
        cumulative_[k] = cumulative_[k - 1] + step_ / 6.0 * (edge_rate_[k - 1] + 4.0 * mid_rate_[k - 1] + edge_rate_[k]);
    }
}

double CumulativeTable::operator()(double u) const noexcept {
    if (u <= 0.0) {
        return 0.0;
    }
    if (u >= span_) {
        return cumulative_.back();
    }
    const auto k = std::min(static_cast<std::size_t>(u / step_), mid_rate_.size() - 1);
    const double x = (u - static_cast<double>(k) * step_) / step_;
    const double x2 = x * x;
    const double x3 = x2 * x;
    // Integrated Lagrange weights of the quadratic through x = 0, 1/2, 1.
    const double w0 = 2.0 * (x3 / 3.0 - 0.75 * x2 + 0.5 * x);
    const double wm = -4.0 * (x3 / 3.0 - 0.5 * x2);
    const double w1 = 2.0 * (x3 / 3.0 - 0.25 * x2);
    return cumulative_[k] + step_ * (w0 * edge_rate_[k] + wm * mid_rate_[k] + w1 * edge_rate_[k + 1]);
}

std::size_t BinnedCounts::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

BinnedCounts bin_events(std::span<const ConjunctionEvent> events, double bin_width) {
    if (events.empty()) {
        throw ArgumentError("bin_events: no events");
    }
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw ArgumentError("bin_events: bin_width must be positive");
    }
    const double window = events.front().window_days;
    for (const auto& e : events) {
        if (e.window_days != window) {
            throw ArgumentError("bin_events: events must share one window length");
        }
    }
    // A trailing sliver narrower than 1e-9 bin widths is absorbed into the previous bin.
    const auto n_bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window / bin_width - 1e-9)));

    BinnedCounts out;
    out.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i < n_bins; ++i) {
        out.edges[i] = static_cast<double>(i) * bin_width;
    }
    out.edges[n_bins] = window;
    out.counts.assign(n_bins, 0);

    for (const auto& e : events) {
        for (const double t : e.arrivals) {
            if (t < 0.0 || t > window) {
                continue;
            }
            // upper_bound finds the first edge > t; the bin is the one before it.
            auto it = std::upper_bound(out.edges.begin(), out.edges.end(), t);
            auto idx = static_cast<std::size_t>(std::distance(out.edges.begin(), it));
            idx = idx == 0 ? 0 : idx - 1;
            ++out.counts[std::min(idx, n_bins - 1)];
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd design_matrix(const BinnedCounts& binned, std::size_t degree) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(binned.bins()), static_cast<Eigen::Index>(degree + 1));
    for (std::size_t i = 0; i < binned.bins(); ++i) {
        const double tbar = binned.midpoint(i);
        double power = binned.width(i);
        for (std::size_t j = 0; j <= degree; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = power;
            power *= tbar;
        }
    }
    return x;
}

Eigen::VectorXd per_event_counts(const BinnedCounts& binned, std::size_t n_events) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(binned.bins()));
    for (std::size_t i = 0; i < binned.bins(); ++i) {
        y(static_cast<Eigen::Index>(i)) = static_cast<double>(binned.counts[i]) / static_cast<double>(n_events);
    }
    return y;
}

} // namespace

std::vector<double> fit_ridge(const BinnedCounts& binned, const RidgeConfig& config, std::size_t n_events) {
    if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) {
        throw ArgumentError("fit_ridge: alpha must be non-negative");
    }
    if (n_events == 0) {
        throw ArgumentError("fit_ridge: n_events must be positive");
    }
    if (binned.bins() == 0) {
        throw ArgumentError("fit_ridge: no bins");
    }
    const auto dim = static_cast<Eigen::Index>(config.degree + 1);
    const Eigen::MatrixXd x = design_matrix(binned, config.degree);
    const Eigen::VectorXd y = per_event_counts(binned, n_events);

    Eigen::MatrixXd normal = x.transpose() * x;
    normal.diagonal().array() += config.alpha;
    const Eigen::VectorXd rhs = x.transpose() * y;

    // Symmetric diagonal scaling: the powers of t span several orders of
    // magnitude, so factor D A D instead of A.
    Eigen::VectorXd scale(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        if (!(normal(j, j) > 0.0)) {
            throw NumericalError("fit_ridge: singular normal equations");
        }
        scale(j) = 1.0 / std::sqrt(normal(j, j));
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * normal * scale.asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("fit_ridge: normal equations not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    if (lower.diagonal().minCoeff() < 1e-7) {
        throw NumericalError("fit_ridge: singular normal equations (rank-deficient design)");
    }
    const Eigen::VectorXd beta = scale.asDiagonal() * llt.solve(scale.asDiagonal() * rhs);

    const double residual = (normal * beta - rhs).norm();
    const double reference = normal.norm() * beta.norm() + rhs.norm();
    if (!std::isfinite(residual) || (reference > 0.0 && residual > 1e-8 * reference)) {
        throw NumericalError("fit_ridge: normal-equation residual above tolerance");
    }
    return {beta.data(), beta.data() + beta.size()};
}

double ridge_objective(const BinnedCounts& binned, std::span<const double> beta, double alpha, std::size_t n_events) {
    const PolynomialIntensity poly({beta.begin(), beta.end()});
    double sse = 0.0;
    for (std::size_t i = 0; i < binned.bins(); ++i) {
        const double r = static_cast<double>(binned.counts[i]) / static_cast<double>(n_events) -
                         poly.raw(binned.midpoint(i)) * binned.width(i);
        sse += r * r;
    }
    double penalty = 0.0;
    for (const double b : beta) {
        penalty += b * b;
    }
    return sse + alpha * penalty;
}

std::vector<double> fit_event(const ConjunctionEvent& event, const RidgeConfig& config) {
    return fit_ridge(bin_events(std::span(&event, 1), config.bin_width), config, 1);
}

GaussianPrior prior_from_fit(const std::vector<std::vector<double>>& per_event_coefficients, double sigma_floor) {
    if (per_event_coefficients.empty()) {
        throw ArgumentError("prior_from_fit: no coefficient vectors");
    }
    if (!(sigma_floor > 0.0)) {
        throw ArgumentError("prior_from_fit: sigma_floor must be positive");
    }
    const auto dim = per_event_coefficients.front().size();
    if (dim == 0) {
        throw ArgumentError("prior_from_fit: empty coefficient vector");
    }
    for (const auto& v : per_event_coefficients) {
        if (v.size() != dim) {
            throw ArgumentError("prior_from_fit: coefficient vectors differ in length");
        }
    }
    const auto n = static_cast<double>(per_event_coefficients.size());
    GaussianPrior prior{std::vector<double>(dim, 0.0), std::vector<double>(dim, sigma_floor)};
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& v : per_event_coefficients) {
            mean += v[j];
        }
        mean /= n;
        prior.mu[j] = mean;
        if (per_event_coefficients.size() > 1) {
            double ss = 0.0;
            for (const auto& v : per_event_coefficients) {
                ss += (v[j] - mean) * (v[j] - mean);
            }
            prior.sigma[j] = std::max(std::sqrt(ss / (n - 1.0)), sigma_floor);
        }
    }
    return prior;
}

} // namespace cadence

#pragma once

// Accuracy metrics and the paired benchmark over the NHPP model and the two
// baselines.

#include "cadence/prediction.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cadence {

[[nodiscard]] double mae(std::span<const double> actuals, std::span<const double> predictions);
[[nodiscard]] double rmse(std::span<const double> actuals, std::span<const double> predictions);

// Fraction of non-censored runs with an actual inside [lower95, upper95]. An
// absent upper bound means the interval extends past the horizon.
[[nodiscard]] double interval_coverage(std::span<const PredictionRun> runs);

struct MetricsReport {
    ModelKind model{ModelKind::nhpp};
    std::size_t n{};
    double mae{};
    double rmse{};
    std::optional<double> coverage95;
    std::size_t censored_count{};
};

struct BenchmarkReport {
    std::vector<MetricsReport> models;  // nhpp, naive, mean
    std::size_t cases{};                // distinct (event, cutoff) pairs seen
    std::size_t scored{};
    std::size_t excluded_no_future{};
    std::size_t excluded_short_history{};
    std::size_t excluded_censored{};
    std::size_t excluded_failed{};
};

inline constexpr const char* kExclusionRule =
    "paired scoring: a case counts for every model or for none; excluded are cases without a "
    "post-cutoff CDM, with fewer than 2 CDMs of history, with a censored NHPP prediction, or "
    "where any model failed";

// Pairs runs by (event, cutoff) and scores the cases every model can be scored on.
// Throws ArgumentError when no case is scorable.
[[nodiscard]] BenchmarkReport score_runs(std::span<const PredictionRun> runs);

struct BenchmarkResult {
    std::vector<PredictionRun> runs;
    BenchmarkReport report;
};

[[nodiscard]] BenchmarkResult run_benchmark(std::span<const ConjunctionEvent> events, const GaussianPrior& prior,
                                            double cutoff_days_before_tca, const PredictOptions& options);

[[nodiscard]] std::string report_to_text(const BenchmarkReport& report);
[[nodiscard]] std::string report_to_json(const BenchmarkReport& report);

} // namespace cadence

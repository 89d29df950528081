#pragma once

// Next-CDM prediction: the NHPP posterior pipeline, the two inter-CDM
// baselines, and per-CDM sequential prediction over a whole event.

#include "cadence/cdm_ingest.hpp"
#include "cadence/inference.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cadence {

enum class ModelKind { nhpp, naive, mean };

[[nodiscard]] std::string_view to_string(ModelKind model);
[[nodiscard]] std::optional<ModelKind> model_from_string(std::string_view name);

enum class DiagnosticsPolicy { warn, fail };

struct PredictOptions {
    SamplerConfig sampler;
    double clamp_floor{kDefaultClampFloor};
    DiagnosticsPolicy diagnostics{DiagnosticsPolicy::warn};
    double r_hat_limit{1.05};
};

struct NhppPrediction {
    ArrivalPrediction prediction;
    PosteriorSamples posterior;
    std::vector<std::string> warnings;

    [[nodiscard]] std::optional<double> point_days_to_tca(double window_days) const {
        if (!prediction.point) {
            return std::nullopt;
        }
        return window_days - *prediction.point;
    }
};

// Posterior over [0, t_c] given `history`, then the mixture next-arrival
// prediction over (t_c, t_c + horizon].
[[nodiscard]] NhppPrediction predict_from_history(std::span<const double> history, double t_c, double horizon,
                                                  const GaussianPrior& prior, const PredictOptions& options);

// Splits at the cutoff and predicts with horizon = time left to TCA. Throws
// InsufficientHistory, InitializationError or (under the fail policy)
// DiagnosticsError.
[[nodiscard]] NhppPrediction predict_next_cdm(const ConjunctionEvent& event, const GaussianPrior& prior,
                                              double cutoff_days_before_tca, const PredictOptions& options);

// Last arrival plus the last inter-arrival gap.
[[nodiscard]] double naive_baseline(std::span<const double> history);

// Last arrival plus the mean inter-arrival gap.
[[nodiscard]] double mean_baseline(std::span<const double> history);

struct PredictionRun {
    std::string event_id;
    ModelKind model{ModelKind::nhpp};
    bool sequence{false};
    double window_days{7.0};
    double cutoff_t{};
    std::optional<double> predicted;
    std::optional<double> lower95;
    std::optional<double> upper95;
    bool censored{false};
    std::optional<double> actual_next;
    std::optional<double> restricted_mean;
    std::optional<double> max_r_hat;
    std::optional<std::string> error;
    std::vector<std::string> warnings;

    [[nodiscard]] double cutoff_days_to_tca() const noexcept { return window_days - cutoff_t; }
};

// Seed for one (event, step) pair; stable across runs and platforms.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::string_view event_id, std::uint64_t step);

// All three models at one cutoff. Per-model failures are recorded in `error`.
[[nodiscard]] std::vector<PredictionRun> predict_at_cutoff(const ConjunctionEvent& event, const GaussianPrior& prior,
                                                           double cutoff_days_before_tca,
                                                           const PredictOptions& options);

// For each i >= 1, predicts arrival i+1 from the first i arrivals with the
// cutoff at arrival i. Baselines join once two arrivals are in hand.
[[nodiscard]] std::vector<PredictionRun> predict_event_sequence(const ConjunctionEvent& event,
                                                                const GaussianPrior& prior,
                                                                const PredictOptions& options);

} // namespace cadence

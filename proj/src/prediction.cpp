#include "cadence/prediction.hpp"

#include "cadence/errors.hpp"

#include <cmath>
#include <sstream>

namespace cadence {

std::string_view to_string(ModelKind model) {
    switch (model) {
    case ModelKind::nhpp:
        return "nhpp";
    case ModelKind::naive:
        return "naive";
    case ModelKind::mean:
        return "mean";
    }
    return "unknown";
}

std::optional<ModelKind> model_from_string(std::string_view name) {
    if (name == "nhpp") return ModelKind::nhpp;
    if (name == "naive") return ModelKind::naive;
    if (name == "mean") return ModelKind::mean;
    return std::nullopt;
}

NhppPrediction predict_from_history(std::span<const double> history, double t_c, double horizon,
                                    const GaussianPrior& prior, const PredictOptions& options) {
    prior.validate();
    if (history.empty()) {
        throw InsufficientHistory("no CDM before the cutoff");
    }
    const std::vector<double> observed(history.begin(), history.end());
    const double clamp = options.clamp_floor;
    const LogDensity target = [&prior, &observed, t_c, clamp](std::span<const double> beta) {
        return log_posterior(prior, observed, t_c, beta, clamp);
    };

    NhppPrediction out;
    out.posterior = sample_posterior(target, prior.mu, prior.sigma, options.sampler);
    out.warnings = out.posterior.warnings;

    const double worst = out.posterior.max_r_hat();
    if (std::isnan(worst) || worst > options.r_hat_limit) {
        std::ostringstream msg;
        msg << "convergence gate: max split R-hat " << worst << " exceeds " << options.r_hat_limit;
        if (options.diagnostics == DiagnosticsPolicy::fail) {
            throw DiagnosticsError(msg.str());
        }
        out.warnings.push_back(msg.str());
    }
    out.prediction = mixture_next_arrival(out.posterior.as_coefficient_draws(clamp), t_c, horizon);
    return out;
}

NhppPrediction predict_next_cdm(const ConjunctionEvent& event, const GaussianPrior& prior,
                                double cutoff_days_before_tca, const PredictOptions& options) {
    const auto split = split_at_cutoff(event, cutoff_days_before_tca);
    return predict_from_history(split.history, split.cutoff_t, event.window_days - split.cutoff_t, prior, options);
}

double naive_baseline(std::span<const double> history) {
    if (history.size() < 2) {
        throw InsufficientHistory("naive baseline needs two CDMs");
    }
    const double last = history.back();
    return last + (last - history[history.size() - 2]);
}

double mean_baseline(std::span<const double> history) {
    if (history.size() < 2) {
        throw InsufficientHistory("mean baseline needs two CDMs");
    }
    // The gaps telescope: their mean is the span over the gap count.
    const double mean_gap = (history.back() - history.front()) / static_cast<double>(history.size() - 1);
    return history.back() + mean_gap;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view event_id, std::uint64_t step) {
    // FNV-1a over the id, then a splitmix64 finaliser over the combination.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : event_id) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (h ^ (step + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

PredictionRun make_run(const ConjunctionEvent& event, ModelKind model, bool sequence, double t_c) {
    PredictionRun run;
    run.event_id = event.event_id;
    run.model = model;
    run.sequence = sequence;
    run.window_days = event.window_days;
    run.cutoff_t = t_c;
    return run;
}

PredictionRun nhpp_run(const ConjunctionEvent& event, std::span<const double> history, double t_c, bool sequence,
                       std::optional<double> actual, const GaussianPrior& prior, const PredictOptions& options,
                       std::uint64_t step) {
    auto run = make_run(event, ModelKind::nhpp, sequence, t_c);
    run.actual_next = actual;
    PredictOptions local = options;
    local.sampler.seed = derive_seed(options.sampler.seed, event.event_id, step);
    try {
        auto result = predict_from_history(history, t_c, event.window_days - t_c, prior, local);
        run.predicted = result.prediction.point;
        run.lower95 = result.prediction.lower95;
        run.upper95 = result.prediction.upper95;
        run.censored = result.prediction.censored;
        run.restricted_mean = result.prediction.restricted_mean;
        run.max_r_hat = result.posterior.max_r_hat();
        run.warnings = std::move(result.warnings);
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    return run;
}

PredictionRun baseline_run(const ConjunctionEvent& event, ModelKind model, std::span<const double> history, double t_c,
                           bool sequence, std::optional<double> actual) {
    auto run = make_run(event, model, sequence, t_c);
    run.actual_next = actual;
    try {
        run.predicted = model == ModelKind::naive ? naive_baseline(history) : mean_baseline(history);
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    return run;
}

} // namespace

std::vector<PredictionRun> predict_at_cutoff(const ConjunctionEvent& event, const GaussianPrior& prior,
                                             double cutoff_days_before_tca, const PredictOptions& options) {
    if (!(cutoff_days_before_tca > 0.0) || !(cutoff_days_before_tca < event.window_days)) {
        throw ArgumentError("cutoff must lie strictly inside (0, window_days)");
    }
    const double t_c = event.cutoff_time(cutoff_days_before_tca);
    std::vector<double> history;
    std::optional<double> actual;
    for (const double t : event.arrivals) {
        if (t <= t_c) {
            history.push_back(t);
        } else if (!actual) {
            actual = t;
        }
    }
    std::vector<PredictionRun> runs;
    if (history.empty()) {
        for (const auto model : {ModelKind::nhpp, ModelKind::naive, ModelKind::mean}) {
            auto run = make_run(event, model, false, t_c);
            run.actual_next = actual;
            run.error = InsufficientHistory("no CDM before the cutoff").what();
            runs.push_back(std::move(run));
        }
        return runs;
    }
    runs.push_back(nhpp_run(event, history, t_c, false, actual, prior, options, 0));
    runs.push_back(baseline_run(event, ModelKind::naive, history, t_c, false, actual));
    runs.push_back(baseline_run(event, ModelKind::mean, history, t_c, false, actual));
    return runs;
}

std::vector<PredictionRun> predict_event_sequence(const ConjunctionEvent& event, const GaussianPrior& prior,
                                                  const PredictOptions& options) {
    if (event.arrivals.size() < 2) {
        throw InsufficientHistory("sequence prediction needs at least two CDMs");
    }
    std::vector<PredictionRun> runs;
    const std::span<const double> arrivals(event.arrivals);
    for (std::size_t i = 1; i < arrivals.size(); ++i) {
        const auto history = arrivals.first(i);
        const double t_c = arrivals[i - 1];
        const double actual = arrivals[i];
        runs.push_back(nhpp_run(event, history, t_c, true, actual, prior, options, i));
        if (i >= 2) {
            runs.push_back(baseline_run(event, ModelKind::naive, history, t_c, true, actual));
            runs.push_back(baseline_run(event, ModelKind::mean, history, t_c, true, actual));
        }
    }
    return runs;
}

} // namespace cadence

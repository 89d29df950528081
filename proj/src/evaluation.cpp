#include "cadence/evaluation.hpp"

#include "cadence/errors.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace cadence {

namespace {

void check_pair(std::span<const double> actuals, std::span<const double> predictions) {
    if (actuals.empty() || actuals.size() != predictions.size()) {
        throw ArgumentError("metrics need equal, non-zero lengths");
    }
}

} // namespace

double mae(std::span<const double> actuals, std::span<const double> predictions) {
    check_pair(actuals, predictions);
    double sum = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        sum += std::abs(actuals[i] - predictions[i]);
    }
    return sum / static_cast<double>(actuals.size());
}

double rmse(std::span<const double> actuals, std::span<const double> predictions) {
    check_pair(actuals, predictions);
    double sum = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double e = actuals[i] - predictions[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(actuals.size()));
}

double interval_coverage(std::span<const PredictionRun> runs) {
    std::size_t scorable = 0;
    std::size_t inside = 0;
    for (const auto& run : runs) {
        if (run.censored || run.error || !run.actual_next || !run.lower95) {
            continue;
        }
        ++scorable;
        const double y = *run.actual_next;
        if (*run.lower95 <= y && (!run.upper95 || y <= *run.upper95)) {
            ++inside;
        }
    }
    if (scorable == 0) {
        throw ArgumentError("interval_coverage: no scorable runs");
    }
    return static_cast<double>(inside) / static_cast<double>(scorable);
}

BenchmarkReport score_runs(std::span<const PredictionRun> runs) {
    using Key = std::tuple<std::string, double, bool>;
    std::map<Key, std::array<const PredictionRun*, 3>> cases;
    for (const auto& run : runs) {
        cases[{run.event_id, run.cutoff_t, run.sequence}][static_cast<std::size_t>(run.model)] = &run;
    }

    BenchmarkReport report;
    report.cases = cases.size();
    std::array<std::vector<double>, 3> actual;
    std::array<std::vector<double>, 3> predicted;
    std::vector<PredictionRun> scored_nhpp;
    for (const auto& [key, slot] : cases) {
        const auto* nhpp = slot[0];
        const auto* any = nhpp ? nhpp : (slot[1] ? slot[1] : slot[2]);
        if (!any->actual_next) {
            ++report.excluded_no_future;
            continue;
        }
        bool short_history = false;
        bool failed = false;
        for (const auto* run : slot) {
            if (!run) {
                short_history = true;
            } else if (run->error) {
                (run->model == ModelKind::nhpp ? failed : short_history) = true;
            }
        }
        if (short_history) {
            ++report.excluded_short_history;
            continue;
        }
        if (failed) {
            ++report.excluded_failed;
            continue;
        }
        if (nhpp->censored || !nhpp->predicted) {
            ++report.excluded_censored;
            continue;
        }
        for (std::size_t m = 0; m < 3; ++m) {
            actual[m].push_back(*slot[m]->actual_next);
            predicted[m].push_back(*slot[m]->predicted);
        }
        scored_nhpp.push_back(*nhpp);
    }
    report.scored = scored_nhpp.size();
    if (report.scored == 0) {
        throw ArgumentError("no scorable predictions");
    }
    for (std::size_t m = 0; m < 3; ++m) {
        MetricsReport metrics;
        metrics.model = static_cast<ModelKind>(m);
        metrics.n = actual[m].size();
        metrics.mae = mae(actual[m], predicted[m]);
        metrics.rmse = rmse(actual[m], predicted[m]);
        if (metrics.model == ModelKind::nhpp) {
            metrics.coverage95 = interval_coverage(scored_nhpp);
            metrics.censored_count = report.excluded_censored;
        }
        report.models.push_back(metrics);
    }
    return report;
}

BenchmarkResult run_benchmark(std::span<const ConjunctionEvent> events, const GaussianPrior& prior,
                              double cutoff_days_before_tca, const PredictOptions& options) {
    BenchmarkResult result;
    for (const auto& event : events) {
        auto runs = predict_at_cutoff(event, prior, cutoff_days_before_tca, options);
        for (auto& r : runs) {
            result.runs.push_back(std::move(r));
        }
    }
    result.report = score_runs(result.runs);
    return result;
}

std::string report_to_text(const BenchmarkReport& report) {
    static constexpr const char* kNames[] = {"NHPP", "Naive Baseline", "Mean-Based Baseline"};
    std::ostringstream out;
    out << "# " << kExclusionRule << "\n";
    out << "# cases " << report.cases << ", scored " << report.scored << ", no future CDM "
        << report.excluded_no_future << ", short history " << report.excluded_short_history << ", censored "
        << report.excluded_censored << ", failed " << report.excluded_failed << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %6s %12s %12s %11s %9s\n", "Model", "n", "MAE [days]", "RMSE [days]",
                  "coverage95", "censored");
    out << line;
    for (const auto& m : report.models) {
        char coverage[32] = "-";
        if (m.coverage95) {
            std::snprintf(coverage, sizeof coverage, "%.3f", *m.coverage95);
        }
        std::snprintf(line, sizeof line, "%-20s %6zu %12.3f %12.3f %11s %9zu\n", kNames[static_cast<int>(m.model)],
                      m.n, m.mae, m.rmse, coverage, m.censored_count);
        out << line;
    }
    return out.str();
}

std::string report_to_json(const BenchmarkReport& report) {
    nlohmann::ordered_json j;
    j["exclusion_rule"] = kExclusionRule;
    j["cases"] = report.cases;
    j["scored"] = report.scored;
    j["excluded"] = {{"no_future", report.excluded_no_future},
                     {"short_history", report.excluded_short_history},
                     {"censored", report.excluded_censored},
                     {"failed", report.excluded_failed}};
    auto models = nlohmann::ordered_json::array();
    for (const auto& m : report.models) {
        nlohmann::ordered_json row;
        row["model"] = std::string(to_string(m.model));
        row["n"] = m.n;
        row["mae"] = m.mae;
        row["rmse"] = m.rmse;
        row["coverage95"] = m.coverage95 ? nlohmann::ordered_json(*m.coverage95) : nlohmann::ordered_json(nullptr);
        row["censored_count"] = m.censored_count;
        models.push_back(row);
    }
    j["models"] = models;
    return j.dump(2) + "\n";
}

} // namespace cadence

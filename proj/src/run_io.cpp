#include "cadence/run_io.hpp"

#include "cadence/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace cadence {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json days_or_null(const std::optional<double>& t, double window_days) {
    return t ? ordered_json(window_days - *t) : ordered_json(nullptr);
}

std::optional<double> window_time_or_null(const nlohmann::json& j, const char* key, double window_days) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return window_days - j.at(key).get<double>();
}

} // namespace

std::string run_to_json_line(const PredictionRun& run) {
    ordered_json j;
    j["event_id"] = run.event_id;
    j["model"] = std::string(to_string(run.model));
    j["mode"] = run.sequence ? "sequence" : "cutoff";
    j["window_days"] = run.window_days;
    j["cutoff_days_to_tca"] = run.cutoff_days_to_tca();
    j["predicted_days_to_tca"] = days_or_null(run.predicted, run.window_days);
    j["lower95"] = days_or_null(run.lower95, run.window_days);
    j["upper95"] = days_or_null(run.upper95, run.window_days);
    j["censored"] = run.censored;
    j["actual_days_to_tca"] = days_or_null(run.actual_next, run.window_days);
    j["predicted_mean_days_to_tca"] = days_or_null(run.restricted_mean, run.window_days);
    j["max_r_hat"] = run.max_r_hat && std::isfinite(*run.max_r_hat) ? ordered_json(*run.max_r_hat) : ordered_json(nullptr);
    j["error"] = run.error ? ordered_json(*run.error) : ordered_json(nullptr);
    j["warnings"] = run.warnings;
    return j.dump();
}

std::string runs_to_jsonl(const std::vector<PredictionRun>& runs) {
    std::string out;
    for (const auto& run : runs) {
        out += run_to_json_line(run);
        out += '\n';
    }
    return out;
}

std::vector<PredictionRun> runs_from_jsonl(std::string_view text) {
    std::vector<PredictionRun> runs;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        ++line_no;
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        const auto line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            PredictionRun run;
            run.event_id = j.at("event_id").get<std::string>();
            const auto model = model_from_string(j.at("model").get<std::string>());
            if (!model) {
                throw RowError(line_no, "unknown model '" + j.at("model").get<std::string>() + "'");
            }
            run.model = *model;
            run.sequence = j.value("mode", std::string("cutoff")) == "sequence";
            run.window_days = j.value("window_days", 7.0);
            run.cutoff_t = run.window_days - j.at("cutoff_days_to_tca").get<double>();
            run.predicted = window_time_or_null(j, "predicted_days_to_tca", run.window_days);
            run.lower95 = window_time_or_null(j, "lower95", run.window_days);
            run.upper95 = window_time_or_null(j, "upper95", run.window_days);
            run.censored = j.value("censored", false);
            run.actual_next = window_time_or_null(j, "actual_days_to_tca", run.window_days);
            run.restricted_mean = window_time_or_null(j, "predicted_mean_days_to_tca", run.window_days);
            if (j.contains("max_r_hat") && !j.at("max_r_hat").is_null()) {
                run.max_r_hat = j.at("max_r_hat").get<double>();
            }
            if (j.contains("error") && !j.at("error").is_null()) {
                run.error = j.at("error").get<std::string>();
            }
            if (j.contains("warnings")) {
                run.warnings = j.at("warnings").get<std::vector<std::string>>();
            }
            runs.push_back(std::move(run));
        } catch (const nlohmann::json::exception& e) {
            throw RowError(line_no, e.what());
        }
    }
    return runs;
}

} // namespace cadence

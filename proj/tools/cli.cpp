#include "cli.hpp"

#include "run_config.hpp"

#include "cadence/cdm_ingest.hpp"
#include "cadence/errors.hpp"
#include "cadence/evaluation.hpp"
#include "cadence/intensity.hpp"
#include "cadence/point_process.hpp"
#include "cadence/prediction.hpp"
#include "cadence/run_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace cadence::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Whole-file replacement: write a sibling temp file, then rename over the target.
void write_atomic(const std::string& path, std::string_view content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + path + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("write failed for '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot replace '" + path + "'");
    }
}

struct CommonFlags {
    std::string config_path;
    std::optional<double> window_days;
    std::optional<double> cutoff;
    std::optional<std::size_t> degree;
    std::optional<double> alpha;
    std::optional<double> bin_width;
    std::optional<std::size_t> chains;
    std::optional<std::size_t> draws;
    std::optional<std::size_t> warmup;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma_floor;
    std::optional<double> clamp_floor;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "JSON file with configuration values (flags take precedence)");
    sub->add_option("--window-days", f.window_days, "Screening window length before TCA [days] (default 7)");
    sub->add_option("--cutoff", f.cutoff, "Decision cutoff before TCA [days] (default 2.5)");
    sub->add_option("--degree", f.degree, "Polynomial degree of the intensity (default 3)");
    sub->add_option("--alpha", f.alpha, "Ridge penalty (default 1.0)");
    sub->add_option("--bin-width", f.bin_width, "Bin width for the ridge fit [days] (default 0.5)");
    sub->add_option("--chains", f.chains, "MCMC chains (default 4)");
    sub->add_option("--draws", f.draws, "Retained draws per chain (default 1000)");
    sub->add_option("--warmup", f.warmup, "Warmup iterations per chain (default 1000)");
    sub->add_option("--seed", f.seed, "Base random seed (default 0, or CADENCE_SEED)");
    sub->add_option("--sigma-floor", f.sigma_floor, "Lower bound on prior standard deviations (default 1e-3)");
    sub->add_option("--clamp", f.clamp_floor, "Intensity floor [CDMs/day] (default 1e-6)");
}

// Precedence: defaults < config file < CADENCE_SEED < flags.
RunConfig resolve(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) {
        try {
            cfg.apply_json(read_file(f.config_path));
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
    }
    if (const char* env = std::getenv("CADENCE_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(env, &used);
            if (env[used] != '\0') {
                throw std::invalid_argument(env);
            }
        } catch (const std::exception&) {
            throw UsageError(std::string("CADENCE_SEED is not an unsigned integer: ") + env);
        }
    }
    if (f.window_days) cfg.window_days = *f.window_days;
    if (f.cutoff) cfg.cutoff_days_before_tca = *f.cutoff;
    if (f.degree) cfg.degree = *f.degree;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.bin_width) cfg.bin_width = *f.bin_width;
    if (f.chains) cfg.chains = *f.chains;
    if (f.draws) cfg.draws = *f.draws;
    if (f.warmup) cfg.warmup = *f.warmup;
    if (f.seed) cfg.seed = *f.seed;
    if (f.sigma_floor) cfg.sigma_floor = *f.sigma_floor;
    if (f.clamp_floor) cfg.clamp_floor = *f.clamp_floor;
    try {
        cfg.validate();
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

PredictOptions predict_options(const RunConfig& cfg, bool strict) {
    PredictOptions options;
    options.sampler.chains = cfg.chains;
    options.sampler.draws = cfg.draws;
    options.sampler.warmup = cfg.warmup;
    options.sampler.seed = cfg.seed;
    options.clamp_floor = cfg.clamp_floor;
    options.diagnostics = strict ? DiagnosticsPolicy::fail : DiagnosticsPolicy::warn;
    return options;
}

std::vector<ConjunctionEvent> load_events(const std::string& path, double window_days, std::ostream& err) {
    const auto records = parse_csv(read_file(path));
    auto assembled = assemble_events(records, window_days);
    for (const auto& w : assembled.warnings) {
        err << "warning: " << w << "\n";
    }
    return std::move(assembled.events);
}

std::string json_number_list(std::span<const double> values) {
    return nlohmann::json(std::vector<double>(values.begin(), values.end())).dump();
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    CommonFlags common;
    std::size_t n_events{0};
    std::vector<double> beta{1.0, 0.8, -0.25, 0.03};
    std::string out;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const RunConfig cfg = resolve(args.common);
    if (args.beta.empty()) {
        throw UsageError("--beta needs at least one coefficient");
    }
    const PolynomialIntensity model(args.beta, cfg.clamp_floor);
    const ObservationWindow window(0.0, cfg.window_days);
    const UtcTime epoch = std::chrono::sys_days{std::chrono::year{2023} / 1 / 1};

    std::vector<ConjunctionEvent> events;
    std::size_t total = 0;
    for (std::size_t k = 0; k < args.n_events; ++k) {
        ConjunctionEvent event;
        char id[32];
        std::snprintf(id, sizeof id, "SIM%05zu", k + 1);
        event.event_id = id;
        event.window_days = cfg.window_days;
        event.tca = epoch + std::chrono::days{static_cast<long>(k)};
        event.arrivals = simulate_thinning(model, window, derive_seed(cfg.seed, "simulate", k));
        total += event.arrivals.size();
        events.push_back(std::move(event));
    }
    write_atomic(args.out, events_to_csv(events));

    nlohmann::ordered_json truth;
    truth["degree"] = args.beta.size() - 1;
    truth["beta"] = args.beta;
    truth["n_events"] = args.n_events;
    truth["seed"] = cfg.seed;
    truth["window_days"] = cfg.window_days;
    truth["clamp_floor"] = cfg.clamp_floor;
    write_atomic(args.out + ".truth.json", truth.dump() + "\n");

    out << "simulated " << args.n_events << " events, " << total << " CDMs -> " << args.out << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- fit-prior

struct FitPriorArgs {
    CommonFlags common;
    std::string train;
    std::string out;
};

int cmd_fit_prior(const FitPriorArgs& args, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(args.common);
    const auto events = load_events(args.train, cfg.window_days, err);
    if (events.empty()) {
        throw std::runtime_error("no events in '" + args.train + "'");
    }
    const RidgeConfig ridge{cfg.alpha, cfg.degree, cfg.bin_width};
    std::vector<std::vector<double>> fits;
    fits.reserve(events.size());
    for (const auto& event : events) {
        fits.push_back(fit_event(event, ridge));
    }
    const auto prior = prior_from_fit(fits, cfg.sigma_floor);
    write_atomic(args.out, prior_to_json(prior));
    out << "fitted " << events.size() << " events: mu=" << json_number_list(prior.mu)
        << " sigma=" << json_number_list(prior.sigma) << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
    CommonFlags common;
    std::string data;
    std::string prior;
    std::string out;
    bool sequence{false};
    bool strict{false};
    std::string posterior_dump;
    std::string posterior_event;
};

std::string posterior_csv(const PosteriorSamples& samples) {
    std::ostringstream csv;
    csv << "chain,draw";
    for (std::size_t j = 0; j < samples.dimension; ++j) {
        csv << ",beta" << j;
    }
    csv << "\n";
    csv.precision(17);
    for (std::size_t c = 0; c < samples.chains; ++c) {
        for (std::size_t i = 0; i < samples.draws; ++i) {
            csv << c << ',' << i;
            for (std::size_t j = 0; j < samples.dimension; ++j) {
                csv << ',' << samples.at(c, i, j);
            }
            csv << "\n";
        }
    }
    return csv.str();
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(args.common);
    if (args.posterior_dump.empty() != args.posterior_event.empty()) {
        throw UsageError("--posterior-dump and --posterior-event go together");
    }
    const GaussianPrior prior = args.prior.empty() ? GaussianPrior::reference() : prior_from_json(read_file(args.prior));
    if (args.common.degree && *args.common.degree + 1 != prior.dimension()) {
        throw std::runtime_error("prior has degree " + std::to_string(prior.dimension() - 1) + " but --degree is " +
                                 std::to_string(*args.common.degree));
    }
    const auto events = load_events(args.data, cfg.window_days, err);
    const PredictOptions options = predict_options(cfg, args.strict);

    std::vector<PredictionRun> runs;
    std::size_t failures = 0;
    for (const auto& event : events) {
        std::vector<PredictionRun> event_runs;
        if (args.sequence) {
            if (event.arrivals.size() < 2) {
                PredictionRun run;
                run.event_id = event.event_id;
                run.sequence = true;
                run.window_days = event.window_days;
                run.cutoff_t = event.arrivals.front();
                run.error = InsufficientHistory("sequence prediction needs at least two CDMs").what();
                event_runs.push_back(std::move(run));
            } else {
                event_runs = predict_event_sequence(event, prior, options);
            }
        } else {
            event_runs = predict_at_cutoff(event, prior, cfg.cutoff_days_before_tca, options);
        }
        for (auto& run : event_runs) {
            failures += run.error ? 1 : 0;
            runs.push_back(std::move(run));
        }
    }
    write_atomic(args.out, runs_to_jsonl(runs));

    if (!args.posterior_dump.empty()) {
        const auto it = std::find_if(events.begin(), events.end(),
                                     [&](const auto& e) { return e.event_id == args.posterior_event; });
        if (it == events.end()) {
            throw std::runtime_error("unknown event '" + args.posterior_event + "'");
        }
        PredictOptions local = options;
        local.sampler.seed = derive_seed(options.sampler.seed, it->event_id, 0);
        const auto result = predict_next_cdm(*it, prior, cfg.cutoff_days_before_tca, local);
        write_atomic(args.posterior_dump, posterior_csv(result.posterior));
    }
    out << "wrote " << runs.size() << " prediction runs for " << events.size() << " events (" << failures
        << " with inline errors) -> " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    CommonFlags common;
    std::string runs;
    std::string out;
    std::string text_out;
};

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
    (void)resolve(args.common);
    const auto runs = runs_from_jsonl(read_file(args.runs));
    if (runs.empty()) {
        throw std::runtime_error("no prediction runs in '" + args.runs + "'");
    }
    const auto report = score_runs(runs);
    const auto text = report_to_text(report);
    if (!args.out.empty()) {
        write_atomic(args.out, report_to_json(report));
    }
    if (!args.text_out.empty()) {
        write_atomic(args.text_out, text);
    }
    out << text;
    return kExitOk;
}

// --------------------------------------------------------------- plot-data

struct PlotArgs {
    CommonFlags common;
    std::string runs;
    std::string event_id;
    std::string data;
    std::string out;
};

int cmd_plot_data(const PlotArgs& args, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(args.common);
    const auto all_runs = runs_from_jsonl(read_file(args.runs));
    if (all_runs.empty()) {
        throw std::runtime_error("no prediction runs in '" + args.runs + "'");
    }
    std::vector<const PredictionRun*> runs;
    for (const auto& r : all_runs) {
        if (r.event_id == args.event_id) {
            runs.push_back(&r);
        }
    }
    if (runs.empty()) {
        throw std::runtime_error("unknown event '" + args.event_id + "'");
    }

    // Arrivals in days to TCA, descending (chronological).
    std::set<double, std::greater<>> arrivals;
    if (!args.data.empty()) {
        const auto events = load_events(args.data, cfg.window_days, err);
        const auto it = std::find_if(events.begin(), events.end(),
                                     [&](const auto& e) { return e.event_id == args.event_id; });
        if (it == events.end()) {
            throw std::runtime_error("event '" + args.event_id + "' not in '" + args.data + "'");
        }
        for (const double t : it->arrivals) {
            arrivals.insert(it->days_to_tca(t));
        }
    } else {
        for (const auto* r : runs) {
            if (r->actual_next) {
                arrivals.insert(r->window_days - *r->actual_next);
            }
            if (r->sequence && !r->error) {
                arrivals.insert(r->cutoff_days_to_tca());
            }
        }
    }

    std::ostringstream csv;
    csv.precision(17);
    csv << "kind,t_days_to_tca,value,model\n";
    std::size_t ordinal = 0;
    for (const double d : arrivals) {
        csv << "arrival," << d << ',' << ++ordinal << ",observed\n";
    }
    for (const auto* r : runs) {
        if (r->error || !r->predicted) {
            continue;
        }
        const double issued = r->cutoff_days_to_tca();
        const auto days = [&](double t) { return r->window_days - t; };
        if (r->model == ModelKind::nhpp) {
            csv << "prediction," << days(*r->predicted) << ',' << issued << ",nhpp\n";
            if (r->lower95) {
                csv << "bound," << days(*r->lower95) << ',' << issued << ",nhpp\n";
            }
            // An upper bound beyond the horizon is drawn at TCA.
            csv << "bound," << (r->upper95 ? days(*r->upper95) : 0.0) << ',' << issued << ",nhpp\n";
        } else {
            csv << "baseline," << days(*r->predicted) << ',' << issued << ',' << to_string(r->model) << "\n";
        }
    }
    write_atomic(args.out, csv.str());
    out << "wrote plot data for " << args.event_id << " -> " << args.out << "\n";
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Next-CDM arrival prediction with a Bayesian non-homogeneous Poisson process", "cadence"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic CDM arrival series by thinning");
    add_common(simulate, sim.common);
    simulate->add_option("--n-events", sim.n_events, "Number of events")->required();
    simulate->add_option("--beta", sim.beta, "True intensity coefficients, ascending power")->delimiter(',');
    simulate->add_option("--out", sim.out, "Output CSV (truth written to <out>.truth.json)")->required();

    FitPriorArgs fit;
    auto* fit_prior = app.add_subcommand("fit-prior", "Fit Gaussian coefficient priors from historical events");
    add_common(fit_prior, fit.common);
    fit_prior->add_option("--train", fit.train, "Training CSV")->required();
    fit_prior->add_option("--out", fit.out, "Output prior JSON")->required();

    PredictArgs pred;
    auto* predict = app.add_subcommand("predict", "Predict the next CDM for every event");
    add_common(predict, pred.common);
    predict->add_option("--data", pred.data, "Event CSV")->required();
    predict->add_option("--prior", pred.prior, "Prior JSON (default: built-in reference prior)");
    predict->add_option("--out", pred.out, "Output JSON lines")->required();
    predict->add_flag("--sequence", pred.sequence, "Predict after every CDM instead of at the cutoff");
    predict->add_flag("--strict-diagnostics", pred.strict, "Fail events whose split R-hat exceeds 1.05");
    predict->add_option("--posterior-dump", pred.posterior_dump, "Write posterior draws of one event to CSV");
    predict->add_option("--posterior-event", pred.posterior_event, "Event for --posterior-dump");

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "Score prediction runs (MAE, RMSE, coverage)");
    add_common(evaluate, eval.common);
    evaluate->add_option("--runs", eval.runs, "Prediction JSON lines")->required();
    evaluate->add_option("--out", eval.out, "Output report JSON");
    evaluate->add_option("--text-out", eval.text_out, "Output report table");

    PlotArgs plot;
    auto* plot_data = app.add_subcommand("plot-data", "Emit tidy CSV behind per-event prediction plots");
    add_common(plot_data, plot.common);
    plot_data->add_option("--runs", plot.runs, "Prediction JSON lines")->required();
    plot_data->add_option("--event", plot.event_id, "Event id")->required();
    plot_data->add_option("--data", plot.data, "Event CSV supplying the arrivals");
    plot_data->add_option("--out", plot.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (fit_prior->parsed()) return cmd_fit_prior(fit, out, err);
        if (predict->parsed()) return cmd_predict(pred, out, err);
        if (evaluate->parsed()) return cmd_evaluate(eval, out);
        if (plot_data->parsed()) return cmd_plot_data(plot, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace cadence::cli

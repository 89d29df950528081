#include "cadence/errors.hpp"
#include "cadence/evaluation.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cadence;

namespace {

PredictionRun run(std::string id, ModelKind model, double t_c, std::optional<double> predicted,
                  std::optional<double> actual) {
    PredictionRun r;
    r.event_id = std::move(id);
    r.model = model;
    r.cutoff_t = t_c;
    r.predicted = predicted;
    r.actual_next = actual;
    return r;
}

PredictionRun interval_run(double lower, std::optional<double> upper, double actual) {
    auto r = run("I", ModelKind::nhpp, 4.5, 5.0, actual);
    r.lower95 = lower;
    r.upper95 = upper;
    return r;
}

std::vector<PredictionRun> full_case(const std::string& id, double t_c, double nhpp, double naive, double mean,
                                     double actual) {
    auto a = run(id, ModelKind::nhpp, t_c, nhpp, actual);
    a.lower95 = nhpp - 0.5;
    a.upper95 = nhpp + 0.5;
    return {a, run(id, ModelKind::naive, t_c, naive, actual), run(id, ModelKind::mean, t_c, mean, actual)};
}

PredictOptions quick_options() {
    PredictOptions opt;
    opt.sampler.draws = 250;
    opt.sampler.warmup = 250;
    return opt;
}

} // namespace

TEST_SUITE("metrics") {
    TEST_CASE("hand-computed values") {
        const std::vector<double> y{1, 2, 3};
        CHECK(mae(y, y) == 0.0);
        CHECK(rmse(y, y) == 0.0);
        CHECK(mae(std::vector{0.0, 0.0}, std::vector{1.0, 3.0}) == 2.0);
        CHECK(rmse(std::vector{0.0, 0.0}, std::vector{1.0, 3.0}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    }

    TEST_CASE("length errors") {
        CHECK_THROWS_AS((void)mae(std::vector<double>{}, std::vector<double>{}), ArgumentError);
        CHECK_THROWS_AS((void)rmse(std::vector{1.0}, std::vector{1.0, 2.0}), ArgumentError);
    }

    TEST_CASE("property: MAE never exceeds RMSE, equality when errors are equal") {
        oracle::Gen gen(61);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto n = static_cast<std::size_t>(gen.integer(1, 50));
            const auto y = gen.normals(n, 3.0);
            const auto p = gen.normals(n, 3.0);
            CHECK(mae(y, p) <= rmse(y, p) * (1.0 + 1e-12));
            std::vector<double> q(n);
            const double e = gen.uniform(0.0, 2.0);
            for (std::size_t i = 0; i < n; ++i) {
                q[i] = y[i] + (gen.integer(0, 1) == 0 ? e : -e);
            }
            CHECK(mae(y, q) == doctest::Approx(rmse(y, q)).epsilon(1e-12));
        }
    }

    TEST_CASE("property: permutation and translation invariance") {
        oracle::Gen gen(62);
        for (int trial = 0; trial < 200; ++trial) {
            const auto n = static_cast<std::size_t>(gen.integer(1, 30));
            auto y = gen.normals(n);
            auto p = gen.normals(n);
            const double m0 = mae(y, p);
            const double r0 = rmse(y, p);
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), gen.rng);
            std::vector<double> ys, ps;
            const double c = gen.uniform(-10.0, 10.0);
            for (auto i : idx) {
                ys.push_back(y[i] + c);
                ps.push_back(p[i] + c);
            }
            CHECK(mae(ys, ps) == doctest::Approx(m0).epsilon(1e-9));
            CHECK(rmse(ys, ps) == doctest::Approx(r0).epsilon(1e-9));
        }
    }
}

TEST_SUITE("interval_coverage") {
    TEST_CASE("all, none, half") {
        CHECK(interval_coverage(std::vector{interval_run(4.6, 5.5, 5.0), interval_run(4.6, 5.5, 5.4)}) == 1.0);
        CHECK(interval_coverage(std::vector{interval_run(4.6, 5.5, 6.0), interval_run(4.6, 5.5, 4.55)}) == 0.0);
        CHECK(interval_coverage(std::vector{interval_run(4.6, 5.5, 5.0), interval_run(4.6, 5.5, 6.0)}) == 0.5);
    }

    TEST_CASE("absent upper bound is unbounded above") {
        CHECK(interval_coverage(std::vector{interval_run(4.6, std::nullopt, 6.9)}) == 1.0);
    }

    TEST_CASE("censored and unscored runs are skipped") {
        auto censored = interval_run(4.6, 5.5, 6.0);
        censored.censored = true;
        CHECK(interval_coverage(std::vector{censored, interval_run(4.6, 5.5, 5.0)}) == 1.0);
        CHECK_THROWS_AS((void)interval_coverage(std::vector{censored}), ArgumentError);
    }
}

TEST_SUITE("score_runs") {
    TEST_CASE("paired scoring and exclusion counts") {
        std::vector<PredictionRun> runs;
        for (auto& r : full_case("A", 4.5, 5.0, 5.5, 4.8, 5.2)) runs.push_back(r);
        for (auto& r : full_case("B", 4.5, 6.0, 6.4, 5.0, 6.1)) runs.push_back(r);
        // No future CDM.
        for (auto& r : full_case("C", 4.5, 5.0, 5.0, 5.0, 0.0)) {
            r.actual_next.reset();
            runs.push_back(r);
        }
        // Baseline undefined.
        auto d = full_case("D", 4.5, 5.0, 5.0, 5.0, 5.1);
        d[1].predicted.reset();
        d[1].error = "insufficient history: naive baseline needs two CDMs";
        d[2].predicted.reset();
        d[2].error = "insufficient history: mean baseline needs two CDMs";
        runs.insert(runs.end(), d.begin(), d.end());
        // Censored NHPP.
        auto e = full_case("E", 4.5, 5.0, 5.0, 5.0, 5.1);
        e[0].censored = true;
        e[0].predicted.reset();
        runs.insert(runs.end(), e.begin(), e.end());
        // NHPP failure.
        auto f = full_case("F", 4.5, 5.0, 5.0, 5.0, 5.1);
        f[0].error = "sampler: log-density not finite";
        runs.insert(runs.end(), f.begin(), f.end());

        const auto report = score_runs(runs);
        CHECK(report.cases == 6);
        CHECK(report.scored == 2);
        CHECK(report.excluded_no_future == 1);
        CHECK(report.excluded_short_history == 1);
        CHECK(report.excluded_censored == 1);
        CHECK(report.excluded_failed == 1);
        REQUIRE(report.models.size() == 3);
        for (const auto& m : report.models) {
            CHECK(m.n == 2);
        }
        CHECK(report.models[0].mae == doctest::Approx(0.15));
        CHECK(report.models[1].mae == doctest::Approx(0.3));
        CHECK(report.models[2].mae == doctest::Approx(0.75));
        CHECK(report.models[0].coverage95 == std::optional<double>(1.0));
        CHECK(report.models[0].censored_count == 1);
        CHECK_FALSE(report.models[1].coverage95);
    }

    TEST_CASE("same event at distinct cutoffs are distinct cases") {
        std::vector<PredictionRun> runs;
        for (auto& r : full_case("A", 3.0, 4.0, 4.0, 4.0, 4.1)) runs.push_back(r);
        for (auto& r : full_case("A", 4.5, 5.0, 5.0, 5.0, 5.1)) runs.push_back(r);
        CHECK(score_runs(runs).scored == 2);
    }

    TEST_CASE("nothing scorable") {
        auto c = full_case("C", 4.5, 5.0, 5.0, 5.0, 0.0);
        for (auto& r : c) {
            r.actual_next.reset();
        }
        CHECK_THROWS_AS((void)score_runs(c), ArgumentError);
    }

    TEST_CASE("text and JSON reports") {
        const auto report = score_runs(full_case("A", 4.5, 5.0, 5.5, 4.8, 5.2));
        const auto text = report_to_text(report);
        CHECK(text.find("# paired scoring") == 0);
        CHECK(text.find("NHPP") != std::string::npos);
        CHECK(text.find("Naive Baseline") != std::string::npos);
        CHECK(text.find("Mean-Based Baseline") != std::string::npos);
        const auto j = nlohmann::json::parse(report_to_json(report));
        CHECK(j.at("scored") == 1);
        CHECK(j.at("models").size() == 3);
        CHECK(j.at("models")[0].at("model") == "nhpp");
        CHECK(j.at("models")[1].at("coverage95").is_null());
    }
}

TEST_SUITE("run_benchmark") {
    ConjunctionEvent event_with(std::string id, std::vector<double> arrivals) {
        ConjunctionEvent e;
        e.event_id = std::move(id);
        e.arrivals = std::move(arrivals);
        return e;
    }

    TEST_CASE("single event with every CDM before the cutoff") {
        const std::vector events{event_with("A", {1.0, 2.0, 3.0})};
        CHECK_THROWS_AS((void)run_benchmark(events, GaussianPrior::reference(), 2.5, quick_options()), ArgumentError);
    }

    TEST_CASE("equal gaps make the baseline errors coincide") {
        const std::vector events{event_with("A", {0.5, 1.5, 2.5, 3.5, 4.5, 5.5}),
                                 event_with("B", {1.2, 2.0, 2.8, 3.6, 4.4, 5.2, 6.0}),
                                 event_with("C", {2.0, 3.0, 4.0, 5.0, 6.0})};
        const auto result = run_benchmark(events, GaussianPrior({1.0, 0.8, -0.25, 0.03}, {0.5, 0.3, 0.1, 0.02}),
                                          2.5, quick_options());
        CHECK(result.runs.size() == 9);
        REQUIRE(result.report.scored > 0);
        CHECK(result.report.models[1].mae == doctest::Approx(result.report.models[2].mae).epsilon(1e-12));
    }
}

#include "cadence/inference.hpp"

#include "cadence/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

namespace cadence {

double log_prior(const GaussianPrior& prior, std::span<const double> beta) {
    if (beta.size() != prior.mu.size() || prior.mu.size() != prior.sigma.size()) {
        throw ArgumentError("log_prior: coefficient count does not match the prior");
    }
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    double sum = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        const double z = (beta[j] - prior.mu[j]) / prior.sigma[j];
        sum += -std::log(prior.sigma[j]) - half_log_two_pi - 0.5 * z * z;
    }
    return sum;
}

double log_posterior(const GaussianPrior& prior, std::span<const double> history, double t_c,
                     std::span<const double> beta, double clamp_floor) {
    const double lp = log_prior(prior, beta);
    const PolynomialIntensity model({beta.begin(), beta.end()}, clamp_floor);
    if (t_c == 0.0) {
        double sum = 0.0;
        for (const double t : history) {
            if (t != 0.0) {
                throw ArgumentError("log_posterior: arrival outside the history window");
            }
            sum += std::log(model(t));
        }
        return lp + sum;
    }
    return lp + log_likelihood(model, history, ObservationWindow(0.0, t_c));
}

void SamplerConfig::validate() const {
    if (chains == 0 || draws == 0 || warmup == 0) {
        throw ArgumentError("sampler: chains, draws and warmup must be positive");
    }
    if (!(step_fraction > 0.0) || (target_acceptance && !(*target_acceptance > 0.0 && *target_acceptance < 1.0))) {
        throw ArgumentError("sampler: step_fraction must be positive and target_acceptance in (0, 1)");
    }
}

double SamplerConfig::acceptance_target(std::size_t dimension) const {
    if (target_acceptance) {
        return *target_acceptance;
    }
    return dimension == 1 ? 0.44 : 0.234;
}

std::vector<std::vector<double>> PosteriorSamples::coordinate(std::size_t coef) const {
    std::vector<std::vector<double>> out(chains, std::vector<double>(draws));
    for (std::size_t c = 0; c < chains; ++c) {
        for (std::size_t i = 0; i < draws; ++i) {
            out[c][i] = at(c, i, coef);
        }
    }
    return out;
}

double PosteriorSamples::max_r_hat() const {
    double worst = 0.0;
    for (const double r : r_hat) {
        if (std::isnan(r)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        worst = std::max(worst, r);
    }
    return worst;
}

CoefficientDraws PosteriorSamples::as_coefficient_draws(double clamp_floor) const {
    return CoefficientDraws{dimension, values, clamp_floor};
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Warmup layout: a fast initial buffer tuning only the global step, slow
// windows (doubling in length) that re-estimate the proposal covariance, and
// a terminal buffer tuning the step against the final covariance.
struct WarmupPlan {
    std::vector<std::size_t> window_ends;  // iterations after which the covariance is refreshed
};

WarmupPlan plan_warmup(std::size_t warmup) {
    WarmupPlan plan;
    if (warmup < 150) {
        return plan;
    }
    const auto init_buffer = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
    const auto term_buffer = static_cast<std::size_t>(0.10 * static_cast<double>(warmup));
    const std::size_t slow_end = warmup - term_buffer;
    std::size_t start = init_buffer;
    std::size_t size = 25;
    while (start < slow_end) {
        std::size_t end = start + size;
        // Fold a short remainder into the current window.
        if (end + 2 * size > slow_end) {
            end = slow_end;
        }
        plan.window_ends.push_back(end);
        start = end;
        size *= 2;
    }
    return plan;
}

std::seed_seq chain_seed_sequence(std::uint64_t seed, std::size_t chain) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(chain), 0x63616465u};
}

struct ChainState {
    std::mt19937_64 rng;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    Vec x;
    double lp{};
    Mat chol;
    double log_step{0.0};
    std::size_t adapt_count{0};
    // Running moments of the current slow window.
    Vec mean;
    Mat scatter;
    std::size_t window_n{0};
    std::size_t accepted{0};
    std::vector<double> values;
};

ChainState start_chain(const LogDensity& log_density, std::span<const double> center, std::span<const double> scale,
                       const SamplerConfig& config, std::size_t chain) {
    const auto dim = static_cast<Eigen::Index>(center.size());
    auto seq = chain_seed_sequence(config.seed, chain);
    ChainState st;
    st.rng.seed(seq);
    st.x.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        st.x(j) = center[static_cast<std::size_t>(j)] + 0.1 * scale[static_cast<std::size_t>(j)] * st.normal(st.rng);
    }
    st.lp = log_density(std::span<const double>(st.x.data(), st.x.size()));
    if (!std::isfinite(st.lp)) {
        throw InitializationError("sampler: log-density not finite at the initial point of chain " +
                                  std::to_string(chain));
    }
    st.chol = Mat::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        st.chol(j, j) = config.step_fraction * scale[static_cast<std::size_t>(j)];
    }
    st.mean = Vec::Zero(dim);
    st.scatter = Mat::Zero(dim, dim);
    st.values.reserve(config.draws * center.size());
    return st;
}

enum class Phase { fast, slow, sampling };

void advance(ChainState& st, const LogDensity& log_density, double target, std::size_t iterations, Phase phase) {
    const auto dim = st.x.size();
    Vec z(dim);
    Vec proposal(dim);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            z(j) = st.normal(st.rng);
        }
        proposal = st.x + std::exp(st.log_step) * (st.chol * z);
        const double lp_new = log_density(std::span<const double>(proposal.data(), proposal.size()));
        const double log_ratio = std::isfinite(lp_new) ? lp_new - st.lp : -std::numeric_limits<double>::infinity();
        const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        if (st.unit(st.rng) < accept_prob) {
            st.x = proposal;
            st.lp = lp_new;
            if (phase == Phase::sampling) {
                ++st.accepted;
            }
        }
        if (phase == Phase::sampling) {
            st.values.insert(st.values.end(), st.x.data(), st.x.data() + st.x.size());
            continue;
        }
        // Robbins-Monro on the log step size.
        ++st.adapt_count;
        st.log_step += std::pow(static_cast<double>(st.adapt_count), -0.6) * (accept_prob - target);
        st.log_step = std::clamp(st.log_step, -15.0, 15.0);
        if (phase == Phase::slow) {
            ++st.window_n;
            const Vec delta = st.x - st.mean;
            st.mean += delta / static_cast<double>(st.window_n);
            st.scatter += delta * (st.x - st.mean).transpose();
        }
    }
}

// Pools the within-chain scatter of the finished window and installs the
// resulting proposal covariance in every chain.
void refresh_proposal(std::vector<ChainState>& chains, std::span<const double> scale) {
    const auto dim = chains.front().x.size();
    Mat scatter = Mat::Zero(dim, dim);
    double n = 0.0;
    for (const auto& st : chains) {
        scatter += st.scatter;
        n += static_cast<double>(st.window_n);
    }
    const double dof = std::max(n - static_cast<double>(chains.size()), 1.0);
    Mat cov = scatter / dof;
    // Shrink towards the diagonal for short windows.
    const Vec diag = cov.diagonal();
    cov = (dof / (dof + 5.0)) * cov;
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double s = scale[static_cast<std::size_t>(j)];
        cov(j, j) += (5.0 / (dof + 5.0)) * 1e-3 * diag(j) + 1e-12 * s * s;
    }
    const Eigen::LLT<Mat> llt((2.38 * 2.38 / static_cast<double>(dim)) * cov);
    for (auto& st : chains) {
        if (llt.info() == Eigen::Success) {
            st.chol = llt.matrixL();
            st.log_step = 0.0;
            st.adapt_count = 0;
        }
        st.window_n = 0;
        st.mean.setZero();
        st.scatter.setZero();
    }
}

template <typename Fn>
void for_each_chain(std::size_t chains, bool parallel, Fn&& fn) {
    if (!parallel || chains < 2) {
        for (std::size_t c = 0; c < chains; ++c) {
            fn(c);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(chains);
    {
        std::vector<std::jthread> workers;
        workers.reserve(chains);
        for (std::size_t c = 0; c < chains; ++c) {
            workers.emplace_back([&, c] {
                try {
                    fn(c);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace

PosteriorSamples sample_posterior(const LogDensity& log_density, std::span<const double> center,
                                  std::span<const double> scale, const SamplerConfig& config) {
    config.validate();
    if (center.empty() || center.size() != scale.size()) {
        throw ArgumentError("sampler: center and scale must be non-empty and of equal length");
    }
    for (const double s : scale) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ArgumentError("sampler: scales must be positive");
        }
    }

    std::vector<std::optional<ChainState>> slots(config.chains);
    for_each_chain(config.chains, config.parallel,
                   [&](std::size_t c) { slots[c].emplace(start_chain(log_density, center, scale, config, c)); });
    std::vector<ChainState> states;
    states.reserve(config.chains);
    for (auto& slot : slots) {
        states.push_back(std::move(*slot));
    }

    const double target = config.acceptance_target(center.size());
    const auto run_phase = [&](std::size_t iterations, Phase phase) {
        if (iterations > 0) {
            for_each_chain(config.chains, config.parallel,
                           [&](std::size_t c) { advance(states[c], log_density, target, iterations, phase); });
        }
    };

    const WarmupPlan plan = plan_warmup(config.warmup);
    if (plan.window_ends.empty()) {
        run_phase(config.warmup, Phase::fast);
    } else {
        std::size_t done = static_cast<std::size_t>(0.15 * static_cast<double>(config.warmup));
        run_phase(done, Phase::fast);
        for (const std::size_t end : plan.window_ends) {
            run_phase(end - done, Phase::slow);
            refresh_proposal(states, scale);
            done = end;
        }
        run_phase(config.warmup - done, Phase::fast);
    }
    run_phase(config.draws, Phase::sampling);

    PosteriorSamples out;
    out.chains = config.chains;
    out.draws = config.draws;
    out.dimension = center.size();
    out.values.reserve(config.chains * config.draws * center.size());
    for (const auto& st : states) {
        out.values.insert(out.values.end(), st.values.begin(), st.values.end());
        out.acceptance.push_back(static_cast<double>(st.accepted) / static_cast<double>(config.draws));
    }

    const bool rhat_ok = config.chains >= 2 && config.draws >= 4;
    const bool ess_ok = config.chains * config.draws >= 100;
    for (std::size_t j = 0; j < out.dimension; ++j) {
        const auto coord = out.coordinate(j);
        out.r_hat.push_back(rhat_ok ? r_hat(coord) : std::numeric_limits<double>::quiet_NaN());
        if (ess_ok) {
            const auto e = ess(coord);
            out.ess.push_back(e.value);
            if (e.degenerate) {
                out.warnings.push_back("coefficient " + std::to_string(j) + ": zero posterior variance, ESS capped");
            }
        } else {
            out.ess.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    if (!rhat_ok || !ess_ok) {
        out.warnings.emplace_back("too few draws for convergence diagnostics");
    }
    return out;
}

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
    double s = 0.0;
    for (const double x : v) {
        s += (x - mean) * (x - mean);
    }
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

double r_hat(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) {
        throw ArgumentError("r_hat: need at least two chains");
    }
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != n) {
            throw ArgumentError("r_hat: chains differ in length");
        }
    }
    if (n < 4) {
        throw ArgumentError("r_hat: need at least four draws per chain");
    }
    const std::size_t half = n / 2;
    std::vector<double> means;
    std::vector<double> variances;
    for (const auto& c : chains) {
        const std::span<const double> all(c);
        for (const auto part : {all.first(half), all.last(half)}) {
            const double m = mean_of(part);
            means.push_back(m);
            variances.push_back(variance_of(part, m));
        }
    }
    const auto h = static_cast<double>(half);
    const double within = mean_of(variances);
    const double grand = mean_of(means);
    const double between = h * variance_of(means, grand);
    if (within == 0.0) {
        return between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    const double var_plus = (h - 1.0) / h * within + between / h;
    return std::sqrt(var_plus / within);
}

EssEstimate ess(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) {
        throw ArgumentError("ess: no chains");
    }
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != n) {
            throw ArgumentError("ess: chains differ in length");
        }
    }
    const auto m = chains.size();
    const double total = static_cast<double>(m * n);
    if (m * n < 100 || n < 4) {
        throw ArgumentError("ess: need at least 100 draws");
    }

    std::vector<double> means(m);
    std::vector<double> variances(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(chains[c]);
        variances[c] = variance_of(chains[c], means[c]);
    }
    const auto nd = static_cast<double>(n);
    const double within = mean_of(variances);
    const double between_over_n = m > 1 ? variance_of(means, mean_of(means)) : 0.0;
    const double var_plus = within * (nd - 1.0) / nd + between_over_n;
    if (within <= 0.0 || var_plus <= 0.0) {
        return {total, true};
    }

    const auto rho = [&](std::size_t lag) {
        double acov = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            const auto& x = chains[c];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) {
                s += (x[i] - means[c]) * (x[i + lag] - means[c]);
            }
            acov += s / nd;
        }
        acov /= static_cast<double>(m);
        return 1.0 - (within - acov) / var_plus;
    };

    // tau = -1 + 2 * sum of positive pair sums (rho_{2k} + rho_{2k+1}).
    double tau = -1.0;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double even = k == 0 ? 1.0 : rho(2 * k);
        const double pair = even + rho(2 * k + 1);
        if (!(pair > 0.0)) {
            break;
        }
        tau += 2.0 * pair;
    }
    const double value = tau > 0.0 ? std::min(total / tau, total) : total;
    return {value, false};
}

} // namespace cadence

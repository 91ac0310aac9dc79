#include "tbpsa/theory_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tbpsa/optimizers.hpp"
#include "tbpsa/text.hpp"

namespace tbpsa::theory {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t unlimited_budget = std::numeric_limits<std::size_t>::max() / 4;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double or_default(double v, double fallback) { return std::isnan(v) ? fallback : v; }

/// Runs fn(run) for run in [0, runs) on up to cfg.threads workers. fn must only write to its own slot.
template <class Fn>
void parallel_runs(std::size_t runs, std::size_t threads, Fn&& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(runs, 1));
    if (threads <= 1) {
        for (std::size_t r = 0; r < runs; ++r) fn(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t r = next++; r < runs; r = next++) fn(r);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

OptimizerConfig es_config(const VerificationConfig& cfg, std::uint64_t run, std::size_t budget)
{
    OptimizerConfig oc;
    oc.dimension = cfg.dimension;
    oc.budget = budget;
    oc.num_workers = 1;
    oc.seed = Rng(cfg.seed).substream(run).key();
    oc.algorithm = Algorithm::Tbpsa;
    oc.tau = cfg.tau;
    oc.force_doubling = cfg.force_doubling;
    return oc;
}

/// One full generation: ask lambda, evaluate, tell. Returns the proposals.
std::vector<Proposal> step_generation(Tbpsa& es, const bench::ObjectiveSpec& objective)
{
    auto batch = es.ask(es.lambda());
    std::vector<EvaluatedCandidate> told;
    told.reserve(batch.size());
    for (const auto& p : batch) told.push_back(p.with_fitness(bench::evaluate(objective, p.candidate.x)));
    es.tell(told);
    return batch;
}

void require_runs(const VerificationConfig& cfg)
{
    if (cfg.runs < 30) throw std::invalid_argument("verifier: runs must be >= 30 for normal-approximation intervals");
    if (cfg.dimension == 0) throw std::invalid_argument("verifier: dimension must be >= 1");
}

}  // namespace

std::string VerificationReport::summary_line() const
{
    std::ostringstream os;
    os << (passed ? "PASS " : "FAIL ") << name << ' ' << statistic << '=' << format_double(estimate) << " ci95=["
       << format_double(ci.low) << ',' << format_double(ci.high) << "] threshold=" << format_double(threshold)
       << " runs=" << runs << " time=" << format_double(std::round(wall_seconds * 1000.0) / 1000.0) << 's';
    return os.str();
}

// --- step-size martingale -------------------------------------------------

VerificationReport measure_log_sigma_drift(const VerificationConfig& cfg, const bench::ObjectiveSpec& objective)
{
    require_runs(cfg);
    if (objective.dimension != cfg.dimension) throw std::invalid_argument("verifier: objective dimension mismatch");
    const auto t0 = Clock::now();

    std::vector<double> drift(cfg.runs, 0.0);
    parallel_runs(cfg.runs, cfg.threads, [&](std::size_t r) {
        Tbpsa es(es_config(cfg, r, unlimited_budget));
        const double log0 = std::log(es.sigma());
        while (es.generation() < cfg.generations) step_generation(es, objective);
        drift[r] = std::log(es.sigma()) - log0;
    });

    VerificationReport rep;
    rep.name = "log-sigma-drift";
    rep.statistic = "mean_drift";
    rep.estimate = stats::mean(drift);
    rep.ci = stats::mean_ci95(drift);
    rep.threshold = 0.0;
    rep.passed = rep.ci.contains(0.0);
    rep.runs = cfg.runs;
    rep.details = {{"generations", static_cast<double>(cfg.generations)},
                   {"standard_error", stats::standard_error(drift)},
                   {"tau", cfg.tau}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

VerificationReport verify_martingale(const VerificationConfig& cfg, const bench::ObjectiveSpec& objective)
{
    if (!bench::is_constant(objective))
        throw std::invalid_argument("verify_martingale: requires a constant objective (random selection)");
    auto rep = measure_log_sigma_drift(cfg, objective);
    rep.name = "verify-martingale";
    return rep;
}

VerificationReport verify_martingale(const VerificationConfig& cfg)
{
    return verify_martingale(cfg, bench::make_constant(cfg.dimension));
}

// --- bounded variance -----------------------------------------------------

VerificationReport verify_variance_bound(const VerificationConfig& cfg)
{
    require_runs(cfg);
    if (!cfg.force_doubling) throw std::invalid_argument("verify_variance_bound: requires force_doubling");
    const auto t0 = Clock::now();
    const auto objective = bench::make_constant(cfg.dimension);
    const std::size_t g = cfg.generations;

    // log_sigma[r * (g + 1) + n]
    std::vector<double> log_sigma(cfg.runs * (g + 1), 0.0);
    parallel_runs(cfg.runs, cfg.threads, [&](std::size_t r) {
        Tbpsa es(es_config(cfg, r, unlimited_budget));
        log_sigma[r * (g + 1)] = std::log(es.sigma());
        for (std::size_t n = 1; n <= g; ++n) {
            step_generation(es, objective);
            log_sigma[r * (g + 1) + n] = std::log(es.sigma());
        }
    });

    const double bound = or_default(cfg.threshold, 2.0);
    std::vector<double> variances(g + 1), ses(g + 1);
    std::vector<double> column(cfg.runs);
    bool ok = true;
    std::size_t worst = 0;
    for (std::size_t n = 0; n <= g; ++n) {
        for (std::size_t r = 0; r < cfg.runs; ++r) column[r] = log_sigma[r * (g + 1) + n];
        variances[n] = stats::sample_variance(column);
        ses[n] = variances[n] * std::sqrt(2.0 / static_cast<double>(cfg.runs - 1));
        if (variances[n] > bound + 3.0 * ses[n]) ok = false;
        if (variances[n] > variances[worst]) worst = n;
    }

    VerificationReport rep;
    rep.name = "verify-variance";
    rep.statistic = "max_var_log_sigma";
    rep.estimate = variances[worst];
    rep.ci = {variances[worst] - 1.96 * ses[worst], variances[worst] + 1.96 * ses[worst]};
    rep.threshold = bound;
    rep.passed = ok;
    rep.runs = cfg.runs;
    rep.details = {{"worst_generation", static_cast<double>(worst)}, {"final_variance", variances[g]}};
    rep.series = {{"var_log_sigma", variances}, {"var_standard_error", ses}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- step-size convergence -------------------------------------------------

std::vector<std::size_t> constant_fitness_mu_schedule(std::size_t dimension, std::size_t num_workers,
                                                      std::size_t generations, bool force_doubling)
{
    using namespace population;
    PopulationSize sizes(4 * dimension, num_workers);
    std::size_t archived = 0;
    std::vector<std::size_t> mu;
    mu.reserve(generations);
    for (std::size_t n = 0; n < generations; ++n) {
        const std::size_t lambda = sizes.lambda();
        mu.push_back(sizes.mu());
        archived = std::min(archived + lambda, window_factor * lambda);
        Decision d = Decision::Stagnating;
        if (!force_doubling && archived < window_factor * lambda) d = Decision::Insufficient;
        sizes.update(d);
    }
    return mu;
}

std::vector<double> reduced_log_sigma_chain(double log_sigma0, double tau, const std::vector<std::size_t>& mu_schedule,
                                            Rng& rng)
{
    std::vector<double> out;
    out.reserve(mu_schedule.size() + 1);
    out.push_back(log_sigma0);
    for (auto mu : mu_schedule) {
        const double step = tau * rng.normal() / std::sqrt(static_cast<double>(mu));
        out.push_back(out.back() + step);
    }
    return out;
}

VerificationReport verify_sigma_convergence(const VerificationConfig& cfg)
{
    require_runs(cfg);
    if (cfg.generations < 4) throw std::invalid_argument("verify_sigma_convergence: generations must be >= 4");
    const auto t0 = Clock::now();
    const std::size_t horizons[3] = {cfg.generations, 2 * cfg.generations, 4 * cfg.generations};
    const auto mu = constant_fitness_mu_schedule(cfg.dimension, 1, horizons[2], cfg.force_doubling);
    const double log0 = -0.5 * std::log(static_cast<double>(cfg.dimension));

    std::vector<std::vector<double>> osc(3, std::vector<double>(cfg.runs));
    std::vector<double> trace0;
    parallel_runs(cfg.runs, cfg.threads, [&](std::size_t r) {
        Rng rng = Rng(cfg.seed).substream(r);
        const auto chain = reduced_log_sigma_chain(log0, cfg.tau, mu, rng);
        for (std::size_t h = 0; h < 3; ++h) {
            const std::size_t end = horizons[h];
            double sup = 0.0;
            for (std::size_t n = end - end / 4; n <= end; ++n) sup = std::max(sup, std::abs(chain[n] - chain[end]));
            osc[h][r] = sup;
        }
        if (r == 0) trace0 = chain;
    });

    std::vector<double> medians(3);
    for (std::size_t h = 0; h < 3; ++h) medians[h] = stats::median(osc[h]);

    VerificationReport rep;
    rep.name = "verify-sigma";
    rep.statistic = "median_tail_oscillation";
    rep.estimate = medians[2];
    rep.ci = {medians[2], medians[0]};
    rep.threshold = 0.0;
    rep.passed = medians[0] > medians[1] && medians[1] > medians[2];
    rep.runs = cfg.runs;
    for (std::size_t h = 0; h < 3; ++h)
        rep.details.emplace_back("median_at_" + std::to_string(horizons[h]), medians[h]);
    rep.series = {{"log_sigma_trace_run0", trace0}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- plateau escape -------------------------------------------------------

VerificationReport verify_plateau_escape(const VerificationConfig& cfg)
{
    require_runs(cfg);
    if (!(cfg.radius >= 0.0)) throw std::invalid_argument("verify_plateau_escape: radius must be >= 0");
    const auto t0 = Clock::now();
    const auto objective = bench::make_plateau(cfg.dimension, cfg.radius);
    const double inf = std::numeric_limits<double>::infinity();

    // First eval index at which a sample or parent leaves S; inf if never.
    std::vector<double> first_escape(cfg.runs, inf);
    parallel_runs(cfg.runs, cfg.threads, [&](std::size_t r) {
        Tbpsa es(es_config(cfg, r, cfg.budget));
        while (!es.exhausted()) {
            const auto before = es.generation();
            auto batch = es.ask(es.lambda());
            for (const auto& p : batch)
                if (p.candidate.x.norm() > cfg.radius) {
                    first_escape[r] = static_cast<double>(p.eval_index);
                    return;
                }
            std::vector<EvaluatedCandidate> told;
            told.reserve(batch.size());
            for (const auto& p : batch) told.push_back(p.with_fitness(bench::evaluate(objective, p.candidate.x)));
            es.tell(told);
            if (es.generation() != before && es.parent().center.norm() > cfg.radius) {
                first_escape[r] = static_cast<double>(es.num_told());
                return;
            }
        }
    });

    const auto escaped = static_cast<double>(
        std::count_if(first_escape.begin(), first_escape.end(), [](double v) { return std::isfinite(v); }));
    const double n = static_cast<double>(cfg.runs);
    const double frac = escaped / n;
    const double half = 1.96 * std::sqrt(frac * (1.0 - frac) / n);

    VerificationReport rep;
    rep.name = "verify-plateau";
    rep.statistic = "escape_fraction";
    rep.estimate = frac;
    rep.ci = {std::max(0.0, frac - half), std::min(1.0, frac + half)};
    rep.threshold = or_default(cfg.threshold, 0.99);
    rep.passed = frac >= rep.threshold;
    rep.runs = cfg.runs;
    rep.details = {{"median_first_escape_index", stats::median(first_escape)},
                   {"radius", cfg.radius},
                   {"budget", static_cast<double>(cfg.budget)}};
    rep.series = {{"first_escape_index", first_escape}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

std::vector<double> spread_record_trace(const VerificationConfig& cfg, std::uint64_t run)
{
    const auto objective = bench::make_constant(cfg.dimension);
    Tbpsa es(es_config(cfg, run, unlimited_budget));
    std::vector<double> records;
    double best = 0.0;
    while (es.generation() < cfg.generations) {
        const Vector center = es.parent().center;
        const auto batch = step_generation(es, objective);
        for (const auto& p : batch) best = std::max(best, (p.candidate.x - center).norm());
        records.push_back(best);
    }
    return records;
}

// --- trap retention -------------------------------------------------------

VerificationReport verify_trap_retention(const VerificationConfig& cfg)
{
    require_runs(cfg);
    const double k_local = cfg.radius;
    Vector offset = Vector::Zero(static_cast<Eigen::Index>(cfg.dimension));
    offset[0] = cfg.trap_offset != 0.0 ? cfg.trap_offset : 4.0 * k_local;
    const auto objective = bench::make_trap(cfg.dimension, k_local, offset, cfg.trap_depth);
    const auto t0 = Clock::now();

    struct RunResult {
        bool retained = true;
        double max_center_norm = 0.0;
        double fitted_k = std::numeric_limits<double>::infinity();
    };
    std::vector<RunResult> results(cfg.runs);

    parallel_runs(cfg.runs, cfg.threads, [&](std::size_t r) {
        Tbpsa es(es_config(cfg, r, cfg.budget));
        RunResult res;
        std::vector<double> max_sigma;  // per generation n, max_i sigma_{n,i}
        double sigma_max_current = 0.0;
        while (!es.exhausted() && res.retained) {
            const auto before = es.generation();
            auto batch = es.ask(es.lambda());
            std::vector<EvaluatedCandidate> told;
            told.reserve(batch.size());
            for (const auto& p : batch) {
                if (p.candidate.x.norm() > k_local) res.retained = false;
                sigma_max_current = std::max(sigma_max_current, p.candidate.sigma);
                told.push_back(p.with_fitness(bench::evaluate(objective, p.candidate.x)));
            }
            es.tell(told);
            res.max_center_norm = std::max(res.max_center_norm, es.parent().center.norm());
            if (es.parent().center.norm() > k_local) res.retained = false;
            if (es.generation() != before) {
                max_sigma.push_back(sigma_max_current);
                sigma_max_current = 0.0;
            }
        }
        // Smallest K on a doubling grid with |x_n| <= K and sigma_{n,i} <= K exp(-n / K) along the run.
        for (double k = 1.0; k <= 1048576.0; k *= 2.0) {
            if (res.max_center_norm > k) continue;
            bool ok = true;
            for (std::size_t n = 0; n < max_sigma.size() && ok; ++n)
                ok = max_sigma[n] <= k * std::exp(-static_cast<double>(n) / k);
            if (ok) {
                res.fitted_k = k;
                break;
            }
        }
        results[r] = res;
    });

    std::vector<double> fitted, max_norms;
    double retained = 0.0;
    for (const auto& res : results) {
        retained += res.retained ? 1.0 : 0.0;
        fitted.push_back(res.fitted_k);
        max_norms.push_back(res.max_center_norm);
    }
    const double n = static_cast<double>(cfg.runs);
    const double frac = retained / n;
    const double half = 1.96 * std::sqrt(frac * (1.0 - frac) / n);
    const auto h1_runs = static_cast<double>(
        std::count_if(fitted.begin(), fitted.end(), [](double v) { return std::isfinite(v); }));

    VerificationReport rep;
    rep.name = "verify-trap";
    rep.statistic = "retention_fraction";
    rep.estimate = frac;
    rep.ci = {std::max(0.0, frac - half), std::min(1.0, frac + half)};
    rep.threshold = or_default(cfg.threshold, 0.95);
    rep.passed = frac >= rep.threshold;
    rep.runs = cfg.runs;
    rep.details = {{"local_radius", k_local},
                   {"offset", offset[0]},
                   {"depth", cfg.trap_depth},
                   {"budget", static_cast<double>(cfg.budget)},
                   {"h1_fit_fraction", h1_runs / n},
                   {"median_fitted_K", stats::median(fitted)},
                   {"median_max_center_norm", stats::median(max_norms)}};
    rep.series = {{"fitted_K", fitted}, {"max_center_norm", max_norms}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

}  // namespace tbpsa::theory

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tbpsa/benchmarks.hpp"
#include "tbpsa/stats.hpp"

namespace tbpsa::theory {

struct VerificationConfig {
    std::size_t dimension = 2;
    std::size_t generations = 30;
    std::size_t runs = 1000;
    std::uint64_t seed = 0;
    double tau = 1.0;
    double radius = 10.0;       // plateau radius R, or the trap's local radius K'
    double trap_offset = 0.0;   // first coordinate of the trap optimum; 0 means 4 K'
    double trap_depth = 1.0;
    std::size_t budget = 100000;
    bool force_doubling = false;
    double threshold = std::numeric_limits<double>::quiet_NaN();  // NaN: the verifier's default
    std::size_t threads = 0;    // 0: hardware concurrency
};

struct VerificationReport {
    std::string name;
    std::string statistic;
    double estimate = 0.0;
    stats::Interval ci{0.0, 0.0};
    double threshold = 0.0;
    bool passed = false;
    std::size_t runs = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, double>> details;
    std::vector<std::pair<std::string, std::vector<double>>> series;

    /// `PASS <name> <statistic>=<estimate> ci95=[lo,hi] threshold=<t> runs=<n> time=<s>s`
    [[nodiscard]] std::string summary_line() const;
};

/**
 * Mean over runs of log(sigma_final) - log(sigma_initial) for the full ES on
 * `objective`. Passes iff the 95% interval contains 0. Any objective is
 * accepted, which makes this the engine behind verify_martingale and the
 * counter-check that selection pressure shows up as drift.
 */
VerificationReport measure_log_sigma_drift(const VerificationConfig& cfg, const bench::ObjectiveSpec& objective);

/// Log step-size drift on the constant function. Non-constant objectives are rejected.
VerificationReport verify_martingale(const VerificationConfig& cfg,
                                     const bench::ObjectiveSpec& objective);
VerificationReport verify_martingale(const VerificationConfig& cfg);

/// Var(log sigma_n) across runs at every generation under forced doubling; bound 2 plus 3 standard errors.
VerificationReport verify_variance_bound(const VerificationConfig& cfg);

/**
 * Tail oscillation sup_{n in last quarter} |log sigma_n - log sigma_H| at
 * horizons H, 2H, 4H (H = cfg.generations). Passes iff the median over runs
 * strictly decreases. Uses the reduced step-size chain.
 */
VerificationReport verify_sigma_convergence(const VerificationConfig& cfg);

/// Fraction of runs in which a sample or parent leaves the plateau ball of radius cfg.radius.
VerificationReport verify_plateau_escape(const VerificationConfig& cfg);

/// Fraction of runs in which no sample or parent leaves B(0, K') on the trap, plus H1 diagnostics.
VerificationReport verify_trap_retention(const VerificationConfig& cfg);

/**
 * Effective mu per generation of TBPSA on a constant function. Only the
 * archive size matters there (every full-window test stagnates), so the
 * schedule is replayed without sampling.
 */
std::vector<std::size_t> constant_fitness_mu_schedule(std::size_t dimension, std::size_t num_workers,
                                                      std::size_t generations, bool force_doubling);

/**
 * Reduced chain for random selection: log sigma_{n+1} = log sigma_n + tau * N(0, 1) / sqrt(mu_n).
 * The mean log step-size of mu uniformly chosen offspring has exactly this law.
 * Returns log sigma_0 .. log sigma_G.
 */
std::vector<double> reduced_log_sigma_chain(double log_sigma0, double tau, const std::vector<std::size_t>& mu_schedule,
                                            Rng& rng);

/// Running max over generations of max_i |x_{n,i} - x_n| for the full ES on the constant function.
std::vector<double> spread_record_trace(const VerificationConfig& cfg, std::uint64_t run);

}  // namespace tbpsa::theory

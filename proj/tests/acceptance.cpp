// Acceptance checks. Usage: acceptance [criterion ...]; no arguments runs all of them.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hv_oracle.hpp"
#include "tbpsa/harness.hpp"
#include "tbpsa/hypervolume.hpp"
#include "tbpsa/optimizers.hpp"
#include "tbpsa/population_control.hpp"
#include "tbpsa/stats.hpp"
#include "tbpsa/text.hpp"
#include "tbpsa/theory_lab.hpp"

using namespace tbpsa;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return format_double(std::round(v * 1e4) / 1e4); }

double detail(const theory::VerificationReport& r, const std::string& key)
{
    for (const auto& [k, v] : r.details)
        if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome martingale()
{
    const auto t0 = Clock::now();
    theory::VerificationConfig c;
    c.dimension = 2;
    c.tau = 1.0;
    c.generations = 30;
    c.runs = 1000;
    const auto r = theory::verify_martingale(c);
    const double secs = elapsed(t0);
    const bool ok = r.ci.contains(0.0) && secs < 120.0;
    return {ok, "drift=" + fmt(r.estimate) + " ci95=[" + fmt(r.ci.low) + "," + fmt(r.ci.high) + "] time=" + fmt(secs) +
                    "s (limit 120s)"};
}

Outcome variance()
{
    const auto t0 = Clock::now();
    theory::VerificationConfig c;
    c.dimension = 1;
    c.generations = 12;
    c.runs = 2000;
    c.force_doubling = true;
    const auto r = theory::verify_variance_bound(c);
    const double secs = elapsed(t0);
    return {r.passed && secs < 120.0, "max_var=" + fmt(r.estimate) + " at generation " +
                                          fmt(detail(r, "worst_generation")) + " bound=2+3SE time=" + fmt(secs) +
                                          "s (limit 120s)"};
}

Outcome sigma_convergence()
{
    theory::VerificationConfig c;
    c.generations = 16;
    c.runs = 500;
    const auto r = theory::verify_sigma_convergence(c);
    return {r.passed, "medians H16=" + fmt(detail(r, "median_at_16")) + " H32=" + fmt(detail(r, "median_at_32")) +
                          " H64=" + fmt(detail(r, "median_at_64"))};
}

Outcome plateau()
{
    const auto t0 = Clock::now();
    std::vector<double> medians;
    double fraction = 0.0;
    for (double radius : {1.0, 5.0, 10.0}) {
        theory::VerificationConfig c;
        c.dimension = 2;
        c.radius = radius;
        c.budget = 100000;
        c.runs = 100;
        const auto r = theory::verify_plateau_escape(c);
        medians.push_back(detail(r, "median_first_escape_index"));
        fraction = r.estimate;  // the last radius is R = 10
    }
    const double secs = elapsed(t0);
    bool ordered = true;
    for (std::size_t i = 0; i < medians.size(); ++i) {
        ordered = ordered && std::isfinite(medians[i]);
        if (i > 0) ordered = ordered && medians[i] >= medians[i - 1];
    }
    const bool ok = fraction >= 0.99 && ordered && secs < 300.0;
    return {ok, "escape_fraction(R=10)=" + fmt(fraction) + " (need >= 0.99) median_escape_index R=1,5,10: " +
                    fmt(medians[0]) + "," + fmt(medians[1]) + "," + fmt(medians[2]) + " time=" + fmt(secs) + "s"};
}

Outcome trap()
{
    theory::VerificationConfig c;
    c.dimension = 2;
    c.radius = 10.0;
    c.trap_offset = 40.0;
    c.trap_depth = 1.0;
    c.budget = 20000;
    c.runs = 100;
    const auto r = theory::verify_trap_retention(c);
    return {r.estimate >= 0.95, "retention=" + fmt(r.estimate) + " (need >= 0.95) h1_fit_fraction=" +
                                    fmt(detail(r, "h1_fit_fraction"))};
}

Outcome local_convergence()
{
    const auto record = bench::ObjectiveRecord::parse("fn=sphere dim=2 seed=6 translate=1");
    std::string text;
    bool ok = true;
    for (auto algo : {Algorithm::Tbpsa, Algorithm::OnePlusOne}) {
        std::vector<double> early, late;
        int exact_early = 0, exact_late = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto spec = record.instantiate(seed);
            auto log_regret = [&](std::size_t budget) {
                OptimizerConfig c;
                c.algorithm = algo;
                c.dimension = 2;
                c.budget = budget;
                c.seed = seed;
                const auto rec = harness::run_experiment(c, spec);
                return std::log(std::max(rec.final_regret.value_or(INFINITY), std::numeric_limits<double>::min()));
            };
            early.push_back(log_regret(1250));
            late.push_back(log_regret(5000));
            const double floor = std::log(std::numeric_limits<double>::min());
            exact_early += early.back() == floor;
            exact_late += late.back() == floor;
        }
        const double drop = stats::median(early) - stats::median(late);
        ok = ok && drop >= 2.0;
        text += std::string(to_string(algo)) + " median log-regret 1250->5000: " + fmt(stats::median(early)) + "->" +
                fmt(stats::median(late)) + " (drop " + fmt(drop) + ", need >= 2, zero regret in " +
                std::to_string(exact_early) + "/50 and " + std::to_string(exact_late) + "/50 runs); ";
    }
    return {ok, text};
}

Outcome naive_vs_center()
{
    harness::ExperimentGrid g;
    g.algorithms = {Algorithm::Tbpsa, Algorithm::NaiveTbpsa};
    g.objectives = {bench::ObjectiveRecord::parse("fn=trap dim=2 radius=10 offset=40 depth=1"),
                    bench::ObjectiveRecord::parse("fn=rastrigin dim=2 translate=3")};
    g.budgets = {5000};
    g.num_workers = {1};
    g.seeds_per_cell = 50;
    const auto records = harness::run_grid(g);
    const auto m = harness::score_matrix(records);
    double naive = 0, center = 0;
    for (const auto& e : m.ranking) (e.algorithm == "NaiveTBPSA" ? naive : center) = e.score;
    return {naive > center, "NaiveTBPSA=" + fmt(naive) + " TBPSA=" + fmt(center) + " over " +
                                std::to_string(m.cells) + " cells"};
}

Outcome hypervolume()
{
    Rng rng(20260);
    Rng mc(20261);
    double worst_gap = 0.0;
    int mc_inside = 0;
    for (int rep = 0; rep < 100; ++rep) {
        bench::ParetoSet s;
        s.reference = Vector::Ones(2);
        const int n = 1 + static_cast<int>(rng.uniform() * 20);
        for (int i = 0; i < n; ++i) {
            Vector p(2);
            p << rng.uniform() * 1.2, rng.uniform() * 1.2;
            s.points.push_back(p);
        }
        const double exact = bench::hypervolume_2d(s);
        worst_gap = std::max(worst_gap, std::abs(exact - oracle::grid_hypervolume(s)));
        const auto est = bench::hypervolume_monte_carlo(s, 20000, mc);
        if (std::abs(est.value - exact) <= 3.0 * est.standard_error) ++mc_inside;
    }
    return {worst_gap <= 1e-6 && mc_inside == 100,
            "max |exact-grid|=" + format_double(worst_gap) + " (need <= 1e-6), Monte Carlo within 3 SE: " +
                std::to_string(mc_inside) + "/100"};
}

Outcome invariants()
{
    std::vector<std::string> failed;
    auto expect = [&](bool cond, const char* what) {
        if (!cond) failed.emplace_back(what);
    };

    // determinism
    OptimizerConfig c;
    c.algorithm = Algorithm::Tbpsa;
    c.dimension = 3;
    c.budget = 3000;
    c.seed = 4;
    c.num_workers = 3;
    const auto rastrigin = bench::make_objective(bench::Function::Rastrigin, 3);
    expect(harness::run_experiment(c, rastrigin) == harness::run_experiment(c, rastrigin), "determinism");

    // monotone best-so-far of the naive recommendation
    c.algorithm = Algorithm::NaiveTbpsa;
    const auto naive = harness::run_experiment(c, rastrigin);
    bool monotone = true;
    for (std::size_t i = 1; i < naive.trace.size(); ++i)
        monotone = monotone && naive.trace[i].reco_fitness <= naive.trace[i - 1].reco_fitness;
    expect(monotone, "monotone best-so-far");

    // lambda floor under random decision sequences
    Rng rng(9);
    bool floor_ok = true;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t init = 1 + static_cast<std::size_t>(rng.uniform() * 30);
        const std::size_t workers = 1 + static_cast<std::size_t>(rng.uniform() * 50);
        population::PopulationSize p(init, workers);
        for (int k = 0; k < 100; ++k) {
            const double u = rng.uniform();
            p.update(u < 0.25 ? population::Decision::Stagnating : population::Decision::Progressing);
            floor_ok = floor_ok && p.lambda() >= std::max(init, workers) && p.mu() >= 1;
        }
    }
    expect(floor_ok, "lambda floor");

    // one doubling undone by four shrink steps
    population::PopulationSize p(8, 1);
    p.update(population::Decision::Stagnating);
    p.update(population::Decision::Stagnating);
    const double doubled = p.lambda_real();
    p.update(population::Decision::Stagnating);
    for (int k = 0; k < 4; ++k) p.update(population::Decision::Progressing);
    expect(p.lambda_real() == doubled, "2 x (2^-1/4)^4 round trip");

    // comparison-based selection
    bool invariant = true;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<EvaluatedCandidate> a, b;
        for (std::size_t i = 0; i < 25; ++i) {
            const double f = std::floor(rng.uniform() * 8);
            a.push_back({{Vector::Zero(1), 1.0}, f, i});
            b.push_back({{Vector::Zero(1), 1.0}, std::exp(f) + 5.0, i});
        }
        Rng r1(rep), r2(rep);
        invariant = invariant && es::select_mu_best(a, 6, r1) == es::select_mu_best(b, 6, r2);
    }
    expect(invariant, "selection invariance");

    // identical exploration for both recommendation modes
    auto a = make_optimizer({2, 800, 2, 7, {}, Algorithm::Tbpsa});
    auto b = make_optimizer({2, 800, 2, 7, {}, Algorithm::NaiveTbpsa});
    bool same = true;
    while (!a->exhausted()) {
        const auto pa = a->ask(2);
        const auto pb = b->ask(2);
        std::vector<EvaluatedCandidate> ta, tb;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            same = same && pa[i].candidate.x == pb[i].candidate.x && pa[i].candidate.sigma == pb[i].candidate.sigma;
            ta.push_back(pa[i].with_fitness(pa[i].candidate.x.squaredNorm()));
            tb.push_back(pb[i].with_fitness(pb[i].candidate.x.squaredNorm()));
        }
        a->tell(ta);
        b->tell(tb);
    }
    expect(same, "identical ask streams");
    bool threw = false;
    try {
        (void)a->ask(1);
    } catch (const BudgetExhausted&) {
        threw = true;
    }
    expect(threw && a->num_asked() == 800, "budget respected");

    std::string text = "determinism, monotone best-so-far, lambda floor, round trip, selection invariance, "
                       "identical ask streams, budget";
    if (!failed.empty()) {
        text = "failed:";
        for (const auto& f : failed) text += " [" + f + "]";
    }
    return {failed.empty(), text};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all{
        {1, "martingale", martingale},
        {2, "variance-bound", variance},
        {3, "sigma-convergence", sigma_convergence},
        {4, "plateau-escape", plateau},
        {5, "trap-retention", trap},
        {6, "local-convergence", local_convergence},
        {7, "naive-vs-center", naive_vs_center},
        {8, "hypervolume", hypervolume},
        {9, "invariants", invariants},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    bool all_passed = true;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s criterion %d %s: %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        all_passed = all_passed && o.passed;
    }
    return all_passed ? 0 : 1;
}

// Command-line front end: single runs, experiment grids, scoring, export and the Monte Carlo verifiers.
//
// Exit codes: 0 success / PASS, 1 FAIL or runtime error, 2 usage error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbpsa/harness.hpp"
#include "tbpsa/text.hpp"
#include "tbpsa/theory_lab.hpp"

namespace {

using namespace tbpsa;

struct RunOptions {
    std::string algo = "NaiveTBPSA";
    std::string fn = "sphere";
    std::size_t dim = 2;
    std::size_t budget = 1000;
    std::size_t workers = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
};

struct VerifyOptions {
    theory::VerificationConfig cfg;
    std::string out;
};

bench::ObjectiveRecord objective_from_flag(const std::string& fn, std::size_t dim, std::uint64_t seed)
{
    if (fn.find('=') != std::string::npos) return bench::ObjectiveRecord::parse(fn);
    return bench::ObjectiveRecord::parse("fn=" + fn + " dim=" + std::to_string(dim) + " seed=" + std::to_string(seed));
}

void print_ranking(const harness::ScoreMatrix& m)
{
    std::cout << "cells=" << m.cells << '\n';
    for (const auto& e : m.ranking) std::cout << e.algorithm << ' ' << format_double(e.score) << '\n';
}

int cmd_run(const RunOptions& o)
{
    const auto record = objective_from_flag(o.fn, o.dim, o.seed);
    OptimizerConfig cfg;
    cfg.algorithm = parse_algorithm(o.algo);
    cfg.dimension = record.dimension;
    cfg.budget = o.budget;
    cfg.num_workers = o.workers;
    cfg.seed = o.seed;
    const auto rec = harness::run_experiment(cfg, record.instantiate(o.seed), record.to_string());

    std::cout << "algorithm=" << to_string(rec.algorithm) << " objective=\"" << rec.objective
              << "\" evaluations=" << rec.evaluations << " status=" << rec.status;
    if (rec.final_regret) std::cout << " regret=" << format_double(*rec.final_regret);
    if (rec.best_fitness) std::cout << " best=" << format_double(*rec.best_fitness);
    std::cout << '\n';
    if (!o.out.empty()) harness::export_records(std::span(&rec, 1), harness::parse_format(o.format), o.out);
    return rec.status == "aborted" ? 1 : 0;
}

void write_report(const theory::VerificationReport& rep, const std::string& path)
{
    nlohmann::json j = {{"name", rep.name},
                        {"statistic", rep.statistic},
                        {"estimate", rep.estimate},
                        {"ci95", {rep.ci.low, rep.ci.high}},
                        {"threshold", rep.threshold},
                        {"passed", rep.passed},
                        {"runs", rep.runs},
                        {"wall_seconds", rep.wall_seconds}};
    // Non-finite values (e.g. a never-escaping run) are written as strings.
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v)); };
    for (const auto& [k, v] : rep.details) j["details"][k] = num(v);
    for (const auto& [k, vs] : rep.series) {
        auto arr = nlohmann::json::array();
        for (double v : vs) arr.push_back(num(v));
        j["series"][k] = arr;
    }
    std::ofstream out(path);
    if (!out) throw harness::IoError("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
    if (!out) throw harness::IoError("write failed: " + path);
}

int finish_verify(const theory::VerificationReport& rep, const std::string& out)
{
    std::cout << rep.summary_line() << '\n';
    for (const auto& [k, v] : rep.details) std::cout << "  " << k << '=' << format_double(v) << '\n';
    if (!out.empty()) write_report(rep, out);
    return rep.passed ? 0 : 1;
}

CLI::App* add_verify(CLI::App& app, const std::string& name, const std::string& help, VerifyOptions& v)
{
    auto* sub = app.add_subcommand(name, help);
    auto& c = v.cfg;
    sub->add_option("--dim", c.dimension, "Dimension")->capture_default_str();
    sub->add_option("--generations", c.generations, "Generations (base horizon for verify-sigma)")
        ->capture_default_str();
    sub->add_option("--runs", c.runs, "Monte Carlo repetitions")->capture_default_str();
    sub->add_option("--seed", c.seed, "Base seed")->capture_default_str();
    sub->add_option("--tau", c.tau, "Lognormal self-adaptation scale")->capture_default_str();
    sub->add_option("--budget", c.budget, "Evaluations per run")->capture_default_str();
    sub->add_option("--radius", c.radius, "Plateau radius R or trap local radius K'")->capture_default_str();
    sub->add_option("--offset", c.trap_offset, "Trap optimum first coordinate (0: 4 K')")->capture_default_str();
    sub->add_option("--depth", c.trap_depth, "Trap depth")->capture_default_str();
    sub->add_option("--threshold", c.threshold, "Pass threshold (default per verifier)");
    sub->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
    sub->add_flag("--force-doubling", c.force_doubling, "Double lambda every generation");
    sub->add_option("--out", v.out, "Write the detailed report as JSON");
    return sub;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"TBPSA / NaiveTBPSA optimizers, benchmark harness and step-size theory checks"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Single optimization run");
    run_cmd->add_option("--algo", run.algo, "TBPSA | NaiveTBPSA | OnePlusOne | RandomSearch")->capture_default_str();
    run_cmd->add_option("--fn", run.fn, "Function name or full objective record")->capture_default_str();
    run_cmd->add_option("--dim", run.dim, "Dimension")->capture_default_str();
    run_cmd->add_option("--budget", run.budget, "Evaluation budget")->capture_default_str();
    run_cmd->add_option("--workers", run.workers, "Batch parallelism")->capture_default_str();
    run_cmd->add_option("--seed", run.seed, "Seed")->capture_default_str();
    run_cmd->add_option("--out", run.out, "Write the run record here");
    run_cmd->add_option("--format", run.format, "csv | json")->capture_default_str();

    std::string grid_config, grid_out, grid_format = "json";
    std::size_t grid_threads = 0;
    auto* grid_cmd = app.add_subcommand("grid", "Run an experiment grid from a config file");
    grid_cmd->add_option("config", grid_config, "Grid config file")->required();
    grid_cmd->add_option("--out", grid_out, "Write all run records here");
    grid_cmd->add_option("--format", grid_format, "csv | json")->capture_default_str();
    grid_cmd->add_option("--threads", grid_threads, "Worker threads (0: all cores)")->capture_default_str();

    std::string score_in, score_out, score_format = "json";
    auto* score_cmd = app.add_subcommand("score", "Pairwise win-frequency scores from run records");
    score_cmd->add_option("records", score_in, "Records JSON file")->required();
    score_cmd->add_option("--out", score_out, "Write the score matrix here");
    score_cmd->add_option("--format", score_format, "csv | json")->capture_default_str();

    std::string export_in, export_out, export_format = "csv";
    auto* export_cmd = app.add_subcommand("export", "Convert run records to CSV or JSON");
    export_cmd->add_option("records", export_in, "Records JSON file")->required();
    export_cmd->add_option("--out", export_out, "Output path")->required();
    export_cmd->add_option("--format", export_format, "csv | json")->capture_default_str();

    VerifyOptions martingale, variance, sigma, plateau, trap;
    martingale.cfg.generations = 30;
    martingale.cfg.runs = 1000;
    variance.cfg.dimension = 1;
    variance.cfg.generations = 12;
    variance.cfg.runs = 2000;
    variance.cfg.force_doubling = true;
    sigma.cfg.generations = 16;
    sigma.cfg.runs = 500;
    plateau.cfg.runs = 100;
    plateau.cfg.budget = 100000;
    trap.cfg.runs = 100;
    trap.cfg.budget = 20000;
    trap.cfg.trap_offset = 40.0;
    auto* vm = add_verify(app, "verify-martingale", "Log step-size drift on the constant function", martingale);
    auto* vv = add_verify(app, "verify-variance", "Bounded variance of log sigma under forced doubling", variance);
    auto* vs = add_verify(app, "verify-sigma", "Empirical convergence of log sigma", sigma);
    auto* vp = add_verify(app, "verify-plateau", "Plateau escape frequency", plateau);
    auto* vt = add_verify(app, "verify-trap", "Local-minimum trap retention", trap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*grid_cmd) {
            const auto grid = harness::ExperimentGrid::load(grid_config);
            const auto records = harness::run_grid(grid, grid_threads);
            if (!grid_out.empty()) harness::export_records(records, harness::parse_format(grid_format), grid_out);
            std::cout << "runs=" << records.size() << '\n';
            print_ranking(harness::score_matrix(records));
            return 0;
        }
        if (*score_cmd) {
            const auto records = harness::import_records(score_in);
            const auto m = harness::score_matrix(records);
            print_ranking(m);
            if (!score_out.empty()) harness::export_matrix(m, harness::parse_format(score_format), score_out);
            return 0;
        }
        if (*export_cmd) {
            const auto records = harness::import_records(export_in);
            harness::export_records(records, harness::parse_format(export_format), export_out);
            return 0;
        }
        if (*vm) return finish_verify(theory::verify_martingale(martingale.cfg), martingale.out);
        if (*vv) {
            variance.cfg.force_doubling = true;
            return finish_verify(theory::verify_variance_bound(variance.cfg), variance.out);
        }
        if (*vs) return finish_verify(theory::verify_sigma_convergence(sigma.cfg), sigma.out);
        if (*vp) return finish_verify(theory::verify_plateau_escape(plateau.cfg), plateau.out);
        if (*vt) return finish_verify(theory::verify_trap_retention(trap.cfg), trap.out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

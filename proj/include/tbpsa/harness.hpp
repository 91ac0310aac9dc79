#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbpsa/benchmarks.hpp"
#include "tbpsa/optimizers.hpp"

namespace tbpsa::harness {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One row per generation.
struct TracePoint {
    std::uint64_t eval_index = 0;  // evaluations consumed when the generation closed
    double sigma = 0.0;
    std::size_t lambda_eff = 0;
    double best_fitness = 0.0;
    std::optional<double> reco_fitness;

    bool operator==(const TracePoint&) const = default;
};

struct RunRecord {
    std::string run_id;
    Algorithm algorithm = Algorithm::NaiveTbpsa;
    std::string objective;  // objective record text
    std::size_t dimension = 0;
    std::size_t budget = 0;
    std::size_t num_workers = 0;
    std::uint64_t seed = 0;

    std::vector<TracePoint> trace;
    std::size_t evaluations = 0;
    std::vector<double> recommendation;  // empty when no recommendation exists
    std::optional<double> best_fitness;
    std::optional<double> final_fitness;
    std::optional<double> final_regret;  // needs a known optimum
    std::string status = "ok";           // ok | no-recommendation | aborted
    std::string message;

    bool operator==(const RunRecord&) const = default;
};

using ObjectiveFn = std::function<double(const Vector&)>;

/**
 * Ask/tell loop until the budget is spent. Each step asks for at most
 * num_workers candidates and evaluates them as one batch. A non-finite
 * objective value aborts the run; the record then carries status "aborted".
 */
RunRecord run_experiment(const OptimizerConfig& config, const ObjectiveFn& objective,
                         std::optional<double> optimum, std::string objective_label);

RunRecord run_experiment(const OptimizerConfig& config, const bench::ObjectiveSpec& objective,
                         std::string objective_label = {});

struct ExperimentGrid {
    std::vector<Algorithm> algorithms;
    std::vector<bench::ObjectiveRecord> objectives;
    std::vector<std::size_t> budgets;
    std::vector<std::size_t> num_workers;
    std::size_t seeds_per_cell = 1;
    std::uint64_t base_seed = 0;

    void validate() const;
    [[nodiscard]] std::size_t total_runs() const;

    /**
     * Plain-text grid description, one `key = value` per line, '#' comments:
     *
     *     algorithms = TBPSA NaiveTBPSA
     *     budgets    = 1000 5000
     *     workers    = 1 10
     *     seeds      = 5
     *     base_seed  = 0
     *     objective  = fn=rastrigin dim=2 translate=2
     *     objective  = fn=trap dim=2 radius=10
     */
    static ExperimentGrid parse(std::istream& in);
    static ExperimentGrid load(const std::string& path);
};

/// All runs in canonical order (objective, budget, workers, seed, algorithm); cells may execute concurrently.
std::vector<RunRecord> run_grid(const ExperimentGrid& grid, std::size_t threads = 0);

struct ScoreEntry {
    std::string algorithm;
    double score;
    bool operator==(const ScoreEntry&) const = default;
};

struct ScoreMatrix {
    std::vector<std::string> algorithms;   // sorted by name
    std::vector<std::vector<double>> wins; // wins[i][j]: cells where i beat j, ties count 1/2
    std::vector<ScoreEntry> ranking;       // descending score
    std::size_t cells = 0;

    bool operator==(const ScoreMatrix&) const = default;
};

/// Pairwise win-frequency scores on final regret. Cells where some run has no regret are skipped.
ScoreMatrix score_matrix(std::span<const RunRecord> records);

inline constexpr const char* csv_header =
    "run_id,algorithm,objective,dimension,budget,num_workers,seed,eval_index,sigma,lambda_eff,best_fitness,"
    "reco_fitness";

void write_csv(std::span<const RunRecord> records, std::ostream& out);
void write_json(std::span<const RunRecord> records, std::ostream& out);
void write_json(const ScoreMatrix& matrix, std::ostream& out);
std::vector<RunRecord> read_json(std::istream& in);

enum class Format { Csv, Json };
Format parse_format(std::string_view s);

void export_records(std::span<const RunRecord> records, Format format, const std::string& path);
void export_matrix(const ScoreMatrix& matrix, Format format, const std::string& path);
std::vector<RunRecord> import_records(const std::string& path);

}  // namespace tbpsa::harness

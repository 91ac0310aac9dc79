#include "tbpsa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "tbpsa/text.hpp"

namespace tbpsa::harness {

using json = nlohmann::json;

// --- single run -------------------------------------------------------------

RunRecord run_experiment(const OptimizerConfig& config, const ObjectiveFn& objective,
                         std::optional<double> optimum, std::string objective_label)
{
    RunRecord rec;
    rec.algorithm = config.algorithm;
    rec.objective = std::move(objective_label);
    rec.dimension = config.dimension;
    rec.budget = config.budget;
    rec.num_workers = config.num_workers;
    rec.seed = config.seed;
    rec.run_id = std::string(to_string(config.algorithm)) + "|" + rec.objective + "|b" + std::to_string(config.budget) +
                 "|w" + std::to_string(config.num_workers) + "|s" + std::to_string(config.seed);

    auto opt = make_optimizer(config);
    auto reco_fitness = [&]() -> std::optional<double> {
        try {
            const double f = objective(opt->recommend());
            return std::isfinite(f) ? std::optional<double>(f) : std::nullopt;
        } catch (const NoRecommendation&) {
            return std::nullopt;
        }
    };

    while (!opt->exhausted()) {
        const auto before = opt->generation();
        const auto batch = opt->ask(config.num_workers);
        std::vector<EvaluatedCandidate> results;
        results.reserve(batch.size());
        for (const auto& p : batch) {
            const double f = objective(p.candidate.x);
            if (!std::isfinite(f)) {
                rec.status = "aborted";
                rec.message = "objective returned " + format_double(f) + " at eval_index " +
                              std::to_string(p.eval_index);
                rec.evaluations = opt->num_told();
                if (opt->best()) rec.best_fitness = opt->best()->fitness;
                return rec;
            }
            results.push_back(p.with_fitness(f));
        }
        opt->tell(results);
        if (opt->generation() != before)
            rec.trace.push_back({opt->num_told(), opt->sigma(), opt->lambda(), opt->best()->fitness, reco_fitness()});
    }

    // close the trace when the budget ends inside a generation
    if (opt->best() && (rec.trace.empty() || rec.trace.back().eval_index != opt->num_told()))
        rec.trace.push_back({opt->num_told(), opt->sigma(), opt->lambda(), opt->best()->fitness, reco_fitness()});

    rec.evaluations = opt->num_told();
    if (opt->best()) rec.best_fitness = opt->best()->fitness;
    try {
        const Vector reco = opt->recommend();
        rec.recommendation.assign(reco.begin(), reco.end());
        const double f = objective(reco);
        if (!std::isfinite(f)) {
            rec.status = "aborted";
            rec.message = "objective returned " + format_double(f) + " at the recommendation";
            return rec;
        }
        rec.final_fitness = f;
        if (optimum) rec.final_regret = f - *optimum;
    } catch (const NoRecommendation& e) {
        rec.status = "no-recommendation";
        rec.message = e.what();
    }
    return rec;
}

RunRecord run_experiment(const OptimizerConfig& config, const bench::ObjectiveSpec& objective,
                         std::string objective_label)
{
    if (objective.dimension != config.dimension)
        throw std::invalid_argument("run_experiment: objective dimension does not match the optimizer");
    if (objective_label.empty()) objective_label = std::string(bench::to_string(objective.function));
    return run_experiment(
        config, [&](const Vector& x) { return bench::evaluate(objective, x); }, bench::known_optimum(objective),
        std::move(objective_label));
}

// --- grids ------------------------------------------------------------------

void ExperimentGrid::validate() const
{
    if (algorithms.empty() || objectives.empty() || budgets.empty() || num_workers.empty() || seeds_per_cell == 0)
        throw std::invalid_argument("grid: every axis must be non-empty");
    for (auto b : budgets)
        for (auto w : num_workers)
            if (w == 0 || b == 0 || w > b) throw std::invalid_argument("grid: need 1 <= workers <= budget");
}

std::size_t ExperimentGrid::total_runs() const
{
    return algorithms.size() * objectives.size() * budgets.size() * num_workers.size() * seeds_per_cell;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) {
        w.erase(std::remove(w.begin(), w.end(), ','), w.end());
        if (!w.empty()) out.push_back(w);
    }
    return out;
}

std::size_t parse_count(const std::string& w)
{
    const double v = parse_double(w);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw std::invalid_argument("grid: bad integer '" + w + "'");
    return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentGrid ExperimentGrid::parse(std::istream& in)
{
    ExperimentGrid g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("grid line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "algorithms") {
            for (const auto& w : words(value)) g.algorithms.push_back(parse_algorithm(w));
        } else if (key == "budgets") {
            for (const auto& w : words(value)) g.budgets.push_back(parse_count(w));
        } else if (key == "workers") {
            for (const auto& w : words(value)) g.num_workers.push_back(parse_count(w));
        } else if (key == "seeds") {
            g.seeds_per_cell = parse_count(value);
        } else if (key == "base_seed") {
            g.base_seed = parse_count(value);
        } else if (key == "objective") {
            g.objectives.push_back(bench::ObjectiveRecord::parse(value));
        } else {
            throw std::invalid_argument("grid line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    g.validate();
    return g;
}

ExperimentGrid ExperimentGrid::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read grid file: " + path);
    return parse(in);
}

std::vector<RunRecord> run_grid(const ExperimentGrid& grid, std::size_t threads)
{
    grid.validate();
    struct Job {
        const bench::ObjectiveRecord* objective;
        std::size_t budget;
        std::size_t workers;
        std::uint64_t seed;
        Algorithm algorithm;
    };
    std::vector<Job> jobs;
    jobs.reserve(grid.total_runs());
    for (const auto& o : grid.objectives)
        for (auto b : grid.budgets)
            for (auto w : grid.num_workers)
                for (std::size_t s = 0; s < grid.seeds_per_cell; ++s)
                    for (auto a : grid.algorithms) jobs.push_back({&o, b, w, grid.base_seed + s, a});

    std::vector<RunRecord> out(jobs.size());
    auto run_one = [&](std::size_t i) {
        const Job& j = jobs[i];
        // Every algorithm in a cell sees the same objective instance and the same seed.
        const auto spec = j.objective->instantiate(j.seed);
        OptimizerConfig cfg;
        cfg.dimension = j.objective->dimension;
        cfg.budget = j.budget;
        cfg.num_workers = j.workers;
        cfg.seed = j.seed;
        cfg.algorithm = j.algorithm;
        out[i] = run_experiment(cfg, spec, j.objective->to_string());
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(jobs.size(), 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < jobs.size(); i = next++) run_one(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// --- scoring ----------------------------------------------------------------

ScoreMatrix score_matrix(std::span<const RunRecord> records)
{
    using CellKey = std::tuple<std::string, std::size_t, std::size_t, std::size_t, std::uint64_t>;
    std::map<CellKey, std::map<std::string, const RunRecord*>> cells;
    std::set<std::string> names;
    for (const auto& r : records) {
        const std::string name(to_string(r.algorithm));
        names.insert(name);
        auto& cell = cells[{r.objective, r.dimension, r.budget, r.num_workers, r.seed}];
        if (!cell.emplace(name, &r).second)
            throw std::invalid_argument("score_matrix: duplicate run for " + name + " in cell " + r.objective);
    }

    ScoreMatrix m;
    m.algorithms.assign(names.begin(), names.end());
    const std::size_t n = m.algorithms.size();
    m.wins.assign(n, std::vector<double>(n, 0.0));
    if (n < 2) throw std::invalid_argument("score_matrix: need at least two algorithms");

    for (const auto& [key, cell] : cells) {
        if (cell.size() != n) throw std::invalid_argument("score_matrix: ragged grid (cell " + std::get<0>(key) + ")");
        const bool usable = std::all_of(cell.begin(), cell.end(), [](const auto& kv) {
            return kv.second->final_regret.has_value();
        });
        if (!usable) continue;
        ++m.cells;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double ri = *cell.at(m.algorithms[i])->final_regret;
                const double rj = *cell.at(m.algorithms[j])->final_regret;
                m.wins[i][j] += ri < rj ? 1.0 : (ri == rj ? 0.5 : 0.0);
            }
    }

    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += m.wins[i][j];
        const double denom = static_cast<double>(m.cells) * static_cast<double>(n - 1);
        m.ranking.push_back({m.algorithms[i], m.cells == 0 ? 0.0 : total / denom});
    }
    std::stable_sort(m.ranking.begin(), m.ranking.end(),
                     [](const ScoreEntry& a, const ScoreEntry& b) { return a.score > b.score; });
    return m;
}

// --- serialization ----------------------------------------------------------

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

json to_json(const RunRecord& r)
{
    json trace = json::array();
    for (const auto& t : r.trace)
        trace.push_back({{"eval_index", t.eval_index},
                         {"sigma", t.sigma},
                         {"lambda_eff", t.lambda_eff},
                         {"best_fitness", t.best_fitness},
                         {"reco_fitness", optional_number(t.reco_fitness)}});
    return {{"run_id", r.run_id},
            {"algorithm", std::string(to_string(r.algorithm))},
            {"objective", r.objective},
            {"dimension", r.dimension},
            {"budget", r.budget},
            {"num_workers", r.num_workers},
            {"seed", r.seed},
            {"trace", trace},
            {"evaluations", r.evaluations},
            {"recommendation", r.recommendation},
            {"best_fitness", optional_number(r.best_fitness)},
            {"final_fitness", optional_number(r.final_fitness)},
            {"final_regret", optional_number(r.final_regret)},
            {"status", r.status},
            {"message", r.message}};
}

RunRecord from_json(const json& j)
{
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    r.objective = j.at("objective").get<std::string>();
    r.dimension = j.at("dimension").get<std::size_t>();
    r.budget = j.at("budget").get<std::size_t>();
    r.num_workers = j.at("num_workers").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("trace"))
        r.trace.push_back({t.at("eval_index").get<std::uint64_t>(), t.at("sigma").get<double>(),
                           t.at("lambda_eff").get<std::size_t>(), t.at("best_fitness").get<double>(),
                           read_optional(t, "reco_fitness")});
    r.evaluations = j.at("evaluations").get<std::size_t>();
    r.recommendation = j.at("recommendation").get<std::vector<double>>();
    r.best_fitness = read_optional(j, "best_fitness");
    r.final_fitness = read_optional(j, "final_fitness");
    r.final_regret = read_optional(j, "final_regret");
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    return r;
}

std::ofstream open_for_write(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void finish_write(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_csv(std::span<const RunRecord> records, std::ostream& out)
{
    out << csv_header << '\n';
    for (const auto& r : records) {
        const std::string prefix = csv_field(r.run_id) + ',' + csv_field(std::string(to_string(r.algorithm))) + ',' +
                                   csv_field(r.objective) + ',' + std::to_string(r.dimension) + ',' +
                                   std::to_string(r.budget) + ',' + std::to_string(r.num_workers) + ',' +
                                   std::to_string(r.seed) + ',';
        for (const auto& t : r.trace)
            out << prefix << t.eval_index << ',' << format_double(t.sigma) << ',' << t.lambda_eff << ','
                << format_double(t.best_fitness) << ',' << (t.reco_fitness ? format_double(*t.reco_fitness) : "")
                << '\n';
    }
}

void write_json(std::span<const RunRecord> records, std::ostream& out)
{
    json arr = json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    out << arr.dump(1) << '\n';
}

void write_json(const ScoreMatrix& m, std::ostream& out)
{
    json ranking = json::array();
    for (const auto& e : m.ranking) ranking.push_back({{"algorithm", e.algorithm}, {"score", e.score}});
    json j = {{"algorithms", m.algorithms}, {"wins", m.wins}, {"ranking", ranking}, {"cells", m.cells}};
    out << j.dump(1) << '\n';
}

std::vector<RunRecord> read_json(std::istream& in)
{
    json arr;
    try {
        in >> arr;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("records: malformed JSON: ") + e.what());
    }
    if (!arr.is_array()) throw std::invalid_argument("records: expected a JSON array");
    std::vector<RunRecord> out;
    try {
        for (const auto& j : arr) out.push_back(from_json(j));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("records: ") + e.what());
    }
    return out;
}

Format parse_format(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "csv") return Format::Csv;
    if (lower == "json") return Format::Json;
    throw std::invalid_argument("unknown format: " + std::string(s));
}

void export_records(std::span<const RunRecord> records, Format format, const std::string& path)
{
    auto out = open_for_write(path);
    if (format == Format::Csv)
        write_csv(records, out);
    else
        write_json(records, out);
    finish_write(out, path);
}

void export_matrix(const ScoreMatrix& m, Format format, const std::string& path)
{
    auto out = open_for_write(path);
    if (format == Format::Json) {
        write_json(m, out);
    } else {
        out << "algorithm,score";
        for (const auto& a : m.algorithms) out << ",wins_vs_" << csv_field(a);
        out << '\n';
        for (const auto& e : m.ranking) {
            const auto i = static_cast<std::size_t>(
                std::find(m.algorithms.begin(), m.algorithms.end(), e.algorithm) - m.algorithms.begin());
            out << csv_field(e.algorithm) << ',' << format_double(e.score);
            for (double w : m.wins[i]) out << ',' << format_double(w);
            out << '\n';
        }
    }
    finish_write(out, path);
}

std::vector<RunRecord> import_records(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read records file: " + path);
    return read_json(in);
}

}  // namespace tbpsa::harness

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tbpsa/es_core.hpp"
#include "tbpsa/population_control.hpp"
#include "tbpsa/rng.hpp"

namespace tbpsa {

enum class Algorithm { Tbpsa, NaiveTbpsa, OnePlusOne, RandomSearch };

std::string_view to_string(Algorithm a);
/// Accepts the canonical names ("TBPSA", "NaiveTBPSA", "OnePlusOne", "RandomSearch"), case-insensitively.
Algorithm parse_algorithm(std::string_view name);

struct OptimizerConfig {
    std::size_t dimension = 1;
    std::size_t budget = 1;
    std::size_t num_workers = 1;
    std::uint64_t seed = 0;
    Vector initial_center;  // empty means the origin
    Algorithm algorithm = Algorithm::NaiveTbpsa;
    double tau = 1.0;
    bool force_doubling = false;  // TBPSA only: double lambda every generation, ignoring the test

    void validate() const;
};

struct BestSoFar {
    Vector point;
    double fitness;
    std::uint64_t eval_index;
};

/// A candidate handed out by ask(); eval_index identifies it in tell().
struct Proposal {
    std::uint64_t eval_index;
    Candidate candidate;

    [[nodiscard]] EvaluatedCandidate with_fitness(double fitness) const { return {candidate, fitness, eval_index}; }
};

class BudgetExhausted : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NoRecommendation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/**
 * Ask/tell optimizer base.
 *
 * ask() hands out at most max_batch proposals, never more than the remaining
 * budget or the remaining room in the current generation. It returns an empty
 * batch when the generation is fully handed out but not fully told. tell()
 * accepts results in any order, keyed by eval_index; each proposal must be told
 * exactly once. ask() and tell() must not be called concurrently.
 */
class Optimizer {
public:
    explicit Optimizer(const OptimizerConfig& config);
    virtual ~Optimizer() = default;

    Optimizer(const Optimizer&) = delete;
    Optimizer& operator=(const Optimizer&) = delete;

    std::vector<Proposal> ask(std::size_t max_batch);
    void tell(std::span<const EvaluatedCandidate> results);

    [[nodiscard]] virtual Vector recommend() const = 0;

    [[nodiscard]] const std::optional<BestSoFar>& best() const noexcept { return best_; }
    [[nodiscard]] const OptimizerConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t num_asked() const noexcept { return asked_; }
    [[nodiscard]] std::size_t num_told() const noexcept { return told_; }
    [[nodiscard]] std::size_t remaining_budget() const noexcept { return config_.budget - asked_; }
    [[nodiscard]] bool exhausted() const noexcept { return asked_ >= config_.budget; }

    // Trace quantities; a "generation" is a parent update for TBPSA and a tell batch otherwise.
    [[nodiscard]] virtual double sigma() const = 0;
    [[nodiscard]] virtual std::size_t lambda() const = 0;
    [[nodiscard]] virtual std::uint64_t generation() const = 0;

protected:
    [[nodiscard]] virtual std::size_t room_in_generation() const = 0;
    virtual std::vector<Candidate> sample(std::size_t count) = 0;
    /// Results sorted by eval_index, with the candidates as they were proposed.
    virtual void learn(std::span<const EvaluatedCandidate> results) = 0;

    OptimizerConfig config_;
    Rng rng_;

private:
    std::map<std::uint64_t, Candidate> pending_;
    std::optional<BestSoFar> best_;
    std::size_t asked_ = 0;
    std::size_t told_ = 0;
};

/**
 * Test-based population-size adaptation (mu/mu, lambda)-ES.
 *
 * Starts with lambda = 4d, mu = d, sigma = 1/sqrt(d). Every complete
 * generation of lambda results is truncated to the mu best, recombined into
 * the next parent, and fed to the stagnation test that grows or shrinks the
 * population. Algorithm::Tbpsa recommends the parent center,
 * Algorithm::NaiveTbpsa the best evaluated point.
 */
class Tbpsa final : public Optimizer {
public:
    explicit Tbpsa(const OptimizerConfig& config);

    [[nodiscard]] Vector recommend() const override;
    [[nodiscard]] double sigma() const override { return parent_.sigma; }
    [[nodiscard]] std::size_t lambda() const override { return sizes_.lambda(); }
    [[nodiscard]] std::uint64_t generation() const override { return parent_.generation; }

    [[nodiscard]] const ParentState& parent() const noexcept { return parent_; }
    [[nodiscard]] const population::PopulationSize& sizes() const noexcept { return sizes_; }
    [[nodiscard]] const population::FitnessArchive& archive() const noexcept { return archive_; }
    [[nodiscard]] std::optional<population::Decision> last_decision() const noexcept { return last_decision_; }
    /// Step-sizes of the most recently completed generation, in proposal order.
    [[nodiscard]] const std::vector<double>& last_generation_sigmas() const noexcept { return last_sigmas_; }

protected:
    [[nodiscard]] std::size_t room_in_generation() const override;
    std::vector<Candidate> sample(std::size_t count) override;
    void learn(std::span<const EvaluatedCandidate> results) override;

private:
    void finish_generation();

    ParentState parent_;
    population::PopulationSize sizes_;
    population::FitnessArchive archive_;
    std::size_t generation_lambda_;
    std::size_t handed_out_ = 0;
    std::vector<EvaluatedCandidate> current_;
    std::vector<double> last_sigmas_;
    std::optional<population::Decision> last_decision_;
};

struct OnePlusOneState {
    Vector parent;
    double fitness;
    double sigma;
};

/// Elitist step: accept iff child fitness <= parent fitness; sigma x2 on acceptance, x2^(-1/4) otherwise.
void one_plus_one_step(OnePlusOneState& state, const EvaluatedCandidate& child);

/// (1+1)-ES baseline. The first proposal is the initial center itself.
class OnePlusOne final : public Optimizer {
public:
    explicit OnePlusOne(const OptimizerConfig& config);

    [[nodiscard]] Vector recommend() const override;
    [[nodiscard]] double sigma() const override { return state_.sigma; }
    [[nodiscard]] std::size_t lambda() const override { return 1; }
    [[nodiscard]] std::uint64_t generation() const override { return batches_; }

    [[nodiscard]] const OnePlusOneState& state() const noexcept { return state_; }

protected:
    [[nodiscard]] std::size_t room_in_generation() const override;
    std::vector<Candidate> sample(std::size_t count) override;
    void learn(std::span<const EvaluatedCandidate> results) override;

private:
    OnePlusOneState state_;
    bool center_proposed_ = false;
    std::uint64_t batches_ = 0;
};

/// Independent standard-normal samples around the initial center.
class RandomSearch final : public Optimizer {
public:
    explicit RandomSearch(const OptimizerConfig& config);

    [[nodiscard]] Vector recommend() const override;
    [[nodiscard]] double sigma() const override { return 1.0; }
    [[nodiscard]] std::size_t lambda() const override { return 1; }
    [[nodiscard]] std::uint64_t generation() const override { return batches_; }

protected:
    [[nodiscard]] std::size_t room_in_generation() const override;
    std::vector<Candidate> sample(std::size_t count) override;
    void learn(std::span<const EvaluatedCandidate> results) override;

private:
    Candidate random_search_step();

    Vector center_;
    std::uint64_t batches_ = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config);

}  // namespace tbpsa

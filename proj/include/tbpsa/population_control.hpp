#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>

#include "tbpsa/es_core.hpp"

namespace tbpsa::population {

/// The archive keeps at most this many multiples of the current lambda.
inline constexpr std::size_t window_factor = 5;

struct ArchiveEntry {
    std::uint64_t eval_index;
    double fitness;
};

/// Most recent fitnesses in evaluation order, trimmed to window_factor * lambda.
class FitnessArchive {
public:
    /// Appends in order and drops the oldest entries beyond window_factor * lambda.
    void push(std::span<const EvaluatedCandidate> batch, std::size_t lambda);
    void push(std::span<const ArchiveEntry> batch, std::size_t lambda);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::deque<ArchiveEntry>& entries() const noexcept { return entries_; }

private:
    void append(const ArchiveEntry& e);
    void trim(std::size_t lambda);

    std::deque<ArchiveEntry> entries_;
};

enum class Decision { Stagnating, Progressing, Insufficient };

const char* to_string(Decision d);

/**
 * Compares the lambda oldest and lambda newest fitnesses of the last
 * window_factor * lambda entries. Progressing iff the difference of means
 * exceeds twice sqrt(var(A)/lambda + var(B)/lambda); a zero difference with
 * zero spread counts as Stagnating.
 */
Decision stagnation_test(const FitnessArchive& archive, std::size_t lambda);

class PopulationSize {
public:
    /// lambda starts at max(lambda_init, num_workers), mu at a quarter of that.
    PopulationSize(std::size_t lambda_init, std::size_t num_workers);

    [[nodiscard]] std::size_t lambda() const;
    [[nodiscard]] std::size_t mu() const;
    [[nodiscard]] double lambda_real() const;
    [[nodiscard]] double mu_real() const { return lambda_real() / 4.0; }
    [[nodiscard]] std::size_t lambda_init() const noexcept { return lambda_init_; }
    [[nodiscard]] std::size_t num_workers() const noexcept { return num_workers_; }
    [[nodiscard]] std::size_t floor() const noexcept;

    /// Stagnating doubles, Progressing shrinks by 2^(-1/4), both clamped at floor().
    void update(Decision decision);

private:
    void clamp();

    // lambda_real = anchor * 2^(quarter_steps / 4); integer steps make x2 and x2^(-1/4) compose exactly.
    double anchor_;
    long quarter_steps_ = 0;
    std::size_t lambda_init_;
    std::size_t num_workers_;
};

}  // namespace tbpsa::population

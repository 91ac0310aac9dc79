#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tbpsa/rng.hpp"

namespace tbpsa {

using Vector = Eigen::VectorXd;

/// A search point together with its own step-size.
struct Candidate {
    Vector x;
    double sigma = 1.0;
};

struct EvaluatedCandidate {
    Candidate candidate;
    double fitness = 0.0;
    std::uint64_t eval_index = 0;
};

struct ParentState {
    Vector center;
    double sigma = 1.0;
    double tau = 1.0;  // lognormal self-adaptation scale; 0 freezes the individual step-sizes
    std::uint64_t generation = 0;
};

namespace es {

/// Throws std::invalid_argument unless sigma > 0, tau >= 0 and every field is finite.
void validate(const ParentState& parent);

/**
 * Deterministic core of the mutation operator:
 * sigma_i = sigma * exp(tau * g), x_i = center + sigma_i * z.
 */
Candidate perturb(const ParentState& parent, double g, const Vector& z);

/**
 * Lognormal self-adaptive mutation. For each of the `count` candidates the
 * stream is consumed as: one scalar normal g, then d normals for z.
 */
std::vector<Candidate> mutate(const ParentState& parent, std::size_t count, Rng& rng);

/**
 * Indices of the mu smallest fitnesses, in ascending fitness order.
 *
 * One uniform key per pool entry is drawn (in pool order) before sorting,
 * and equal fitnesses are ordered by key, so ties are broken uniformly at
 * random.
 */
std::vector<std::size_t> select_mu_best(std::span<const EvaluatedCandidate> pool, std::size_t mu, Rng& rng);

struct Recombined {
    Vector center;
    double sigma;
};

/// Arithmetic mean of the points, geometric mean of the step-sizes.
Recombined recombine(std::span<const EvaluatedCandidate> selected);

}  // namespace es
}  // namespace tbpsa

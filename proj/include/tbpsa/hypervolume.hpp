#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tbpsa/es_core.hpp"
#include "tbpsa/rng.hpp"

namespace tbpsa::bench {

/// Objective vectors under minimization, with a componentwise-larger reference point.
struct ParetoSet {
    std::vector<Vector> points;
    Vector reference;
};

/// Points that strictly dominate the reference (componentwise <); the rest are dropped.
std::vector<Vector> filter_dominating(const ParetoSet& set);

/// Exact two-objective hypervolume by a sweep over the first objective.
double hypervolume_2d(const ParetoSet& set);

struct HypervolumeEstimate {
    double value;
    double standard_error;
};

/// Monte Carlo hypervolume for any number of objectives: dominated fraction of the reference box times its volume.
HypervolumeEstimate hypervolume_monte_carlo(const ParetoSet& set, std::size_t samples, Rng& rng);

/**
 * Turns a multiobjective problem into a single stateful objective.
 *
 * Every call evaluates all objectives at x, adds the vector to an internal
 * archive and returns -hypervolume(archive), so minimizing the scalar
 * maximizes the archive's hypervolume. The value therefore depends on the
 * whole call history; calls must be serialized. Two objectives use the exact
 * sweep; more objectives use a fixed Monte Carlo sample set over the unit box
 * just below the reference, so the value is deterministic and never increases.
 */
class HypervolumeScalarizer {
public:
    using Objective = std::function<double(const Vector&)>;

    HypervolumeScalarizer(std::vector<Objective> objectives, Vector reference, std::uint64_t seed = 0,
                          std::size_t monte_carlo_samples = 100000);

    double operator()(const Vector& x);

    [[nodiscard]] const std::vector<Vector>& archive() const noexcept { return archive_.points; }

private:
    double current_volume() const;

    std::vector<Objective> objectives_;
    ParetoSet archive_;
    std::vector<Vector> samples_;
    std::vector<bool> covered_;
    std::size_t covered_count_ = 0;
    double box_volume_ = 0.0;
};

}  // namespace tbpsa::bench

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tbpsa/es_core.hpp"
#include "tbpsa/rng.hpp"

namespace tbpsa::bench {

using Matrix = Eigen::MatrixXd;

/**
 * Base forms, with y = R^T (x - t):
 *
 *   sphere      sum y_i^2
 *   cigar       y_1^2 + 1e6 sum_{i>1} y_i^2
 *   ellipsoid   sum 1e6^((i-1)/(d-1)) y_i^2
 *   discus      1e6 y_1^2 + sum_{i>1} y_i^2
 *   rastrigin   10 d + sum (y_i^2 - 10 cos(2 pi y_i))
 *   griewank    1 + sum y_i^2 / 4000 - prod cos(y_i / sqrt(i))
 *   rosenbrock  sum_{i<d} 100 (y_{i+1} - y_i^2)^2 + (1 - y_i)^2         (d >= 2)
 *   ackley      -20 exp(-0.2 sqrt(mean y_i^2)) - exp(mean cos(2 pi y_i)) + 20 + e
 *   lunacek     min(sum (y_i - 2.5)^2, d + s sum (y_i - m2)^2) + 10 sum (1 - cos(2 pi (y_i - 2.5)))
 *               with s = 1 - 1 / (2 sqrt(d + 20) - 8.2), m2 = -sqrt((2.5^2 - 1) / s)
 *   schwefel    418.9828872724339 d - sum y_i sin(sqrt|y_i|)
 *   plateau     0 if |y| <= R else |y| - R           (R = inf gives the constant function)
 *   trap        min(|y|^2, |y - c|^2 - depth)
 */
enum class Function {
    Sphere,
    Cigar,
    Ellipsoid,
    Discus,
    Rastrigin,
    Griewank,
    Rosenbrock,
    Ackley,
    Lunacek,
    Schwefel,
    Plateau,
    Trap,
};

std::string_view to_string(Function f);
Function parse_function(std::string_view name);

struct ObjectiveSpec {
    Function function = Function::Sphere;
    std::size_t dimension = 1;
    Vector translation;  // empty: no translation
    Matrix rotation;     // empty: identity
    double radius = 0.0;  // plateau R, or the trap's local radius K'
    Vector trap_offset;
    double trap_depth = 0.0;
};

/// Throws std::invalid_argument on malformed specs (bad sizes, non-orthogonal rotation, ...).
void validate(const ObjectiveSpec& spec);

double evaluate(const ObjectiveSpec& spec, const Vector& x);

/// Minimum value of the objective, when known.
std::optional<double> known_optimum(const ObjectiveSpec& spec);

bool is_constant(const ObjectiveSpec& spec);

ObjectiveSpec make_objective(Function f, std::size_t dimension);
ObjectiveSpec make_plateau(std::size_t dimension, double radius);
ObjectiveSpec make_constant(std::size_t dimension);

/// Requires |offset| >= local_radius + sqrt(local_radius^2 + depth) so the trap equals the sphere on B(0, local_radius).
ObjectiveSpec make_trap(std::size_t dimension, double local_radius, const Vector& offset, double depth);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with R's diagonal made positive.
Matrix random_rotation(std::size_t dimension, Rng& rng);

/**
 * Plain-text objective record: `fn=<name> dim=<d> seed=<s> [key=value ...]`.
 *
 * Recognised keys: translate (scale of a uniform [-s, s]^d translation),
 * rotate (0/1), radius, offset (first coordinate of the trap offset), depth.
 */
struct ObjectiveRecord {
    std::string name;
    std::size_t dimension = 1;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;

    [[nodiscard]] std::string to_string() const;
    static ObjectiveRecord parse(std::string_view text);

    /// Builds the concrete instance; translation and rotation are drawn from (seed, instance).
    [[nodiscard]] ObjectiveSpec instantiate(std::uint64_t instance = 0) const;

    bool operator==(const ObjectiveRecord&) const = default;
};

}  // namespace tbpsa::bench

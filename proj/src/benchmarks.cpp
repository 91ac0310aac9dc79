#include "tbpsa/benchmarks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

#include "tbpsa/text.hpp"

namespace tbpsa::bench {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double schwefel_shift = 418.9828872724339;
constexpr double lunacek_mu1 = 2.5;

struct NamedFunction {
    Function f;
    std::string_view name;
};

constexpr NamedFunction function_names[] = {
    {Function::Sphere, "sphere"},         {Function::Cigar, "cigar"},
    {Function::Ellipsoid, "ellipsoid"},   {Function::Discus, "discus"},
    {Function::Rastrigin, "rastrigin"},   {Function::Griewank, "griewank"},
    {Function::Rosenbrock, "rosenbrock"}, {Function::Ackley, "ackley"},
    {Function::Lunacek, "lunacek"},       {Function::Schwefel, "schwefel"},
    {Function::Plateau, "plateau"},       {Function::Trap, "trap"},
};

double base_value(const ObjectiveSpec& spec, const Vector& y)
{
    const auto d = static_cast<double>(y.size());
    switch (spec.function) {
    case Function::Sphere: return y.squaredNorm();
    case Function::Cigar: return y[0] * y[0] + 1e6 * y.tail(y.size() - 1).squaredNorm();
    case Function::Discus: return 1e6 * y[0] * y[0] + y.tail(y.size() - 1).squaredNorm();
    case Function::Ellipsoid: {
        if (y.size() == 1) return y[0] * y[0];
        double s = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            s += std::pow(1e6, static_cast<double>(i) / (d - 1.0)) * y[i] * y[i];
        return s;
    }
    case Function::Rastrigin: {
        double s = 10.0 * d;
        for (double v : y) s += v * v - 10.0 * std::cos(two_pi * v);
        return s;
    }
    case Function::Griewank: {
        double s = 0.0, p = 1.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            s += y[i] * y[i] / 4000.0;
            p *= std::cos(y[i] / std::sqrt(static_cast<double>(i + 1)));
        }
        return 1.0 + s - p;
    }
    case Function::Rosenbrock: {
        double s = 0.0;
        for (Eigen::Index i = 0; i + 1 < y.size(); ++i) {
            const double a = y[i + 1] - y[i] * y[i];
            const double b = 1.0 - y[i];
            s += 100.0 * a * a + b * b;
        }
        return s;
    }
    case Function::Ackley: {
        double sq = 0.0, cs = 0.0;
        for (double v : y) {
            sq += v * v;
            cs += std::cos(two_pi * v);
        }
        return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + std::numbers::e;
    }
    case Function::Lunacek: {
        const double s = 1.0 - 1.0 / (2.0 * std::sqrt(d + 20.0) - 8.2);
        const double mu2 = -std::sqrt((lunacek_mu1 * lunacek_mu1 - 1.0) / s);
        double first = 0.0, second = 0.0, third = 0.0;
        for (double v : y) {
            first += (v - lunacek_mu1) * (v - lunacek_mu1);
            second += (v - mu2) * (v - mu2);
            third += 1.0 - std::cos(two_pi * (v - lunacek_mu1));
        }
        return std::min(first, d + s * second) + 10.0 * third;
    }
    case Function::Schwefel: {
        double s = schwefel_shift * d;
        for (double v : y) s -= v * std::sin(std::sqrt(std::abs(v)));
        return s;
    }
    case Function::Plateau: {
        if (std::isinf(spec.radius)) return 0.0;
        const double r = y.norm();
        return r <= spec.radius ? 0.0 : r - spec.radius;
    }
    case Function::Trap:
        return std::min(y.squaredNorm(), (y - spec.trap_offset).squaredNorm() - spec.trap_depth);
    }
    throw std::logic_error("unhandled function");
}

}  // namespace

std::string_view to_string(Function f)
{
    for (const auto& nf : function_names)
        if (nf.f == f) return nf.name;
    return "?";
}

Function parse_function(std::string_view name)
{
    std::string key;
    for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (const auto& nf : function_names)
        if (nf.name == key) return nf.f;
    throw std::invalid_argument("unknown function: " + std::string(name));
}

void validate(const ObjectiveSpec& spec)
{
    const auto d = static_cast<Eigen::Index>(spec.dimension);
    if (d == 0) throw std::invalid_argument("objective: dimension must be >= 1");
    if (spec.function == Function::Rosenbrock && d < 2)
        throw std::invalid_argument("objective: rosenbrock needs dimension >= 2");
    if (spec.translation.size() != 0) {
        if (spec.translation.size() != d) throw std::invalid_argument("objective: translation has the wrong dimension");
        if (!spec.translation.allFinite()) throw std::invalid_argument("objective: translation must be finite");
    }
    if (spec.rotation.size() != 0) {
        if (spec.rotation.rows() != d || spec.rotation.cols() != d)
            throw std::invalid_argument("objective: rotation has the wrong shape");
        const Matrix gram = spec.rotation.transpose() * spec.rotation;
        if ((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("objective: rotation is not orthogonal");
    }
    if (spec.function == Function::Plateau && !(spec.radius >= 0.0))
        throw std::invalid_argument("objective: plateau radius must be >= 0");
    if (spec.function == Function::Trap) {
        if (spec.trap_offset.size() != d) throw std::invalid_argument("trap: offset has the wrong dimension");
        if (!(spec.trap_depth > 0.0) || !std::isfinite(spec.trap_depth))
            throw std::invalid_argument("trap: depth must be positive and finite");
        if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius))
            throw std::invalid_argument("trap: local radius must be finite and >= 0");
        const double need = spec.radius + std::sqrt(spec.radius * spec.radius + spec.trap_depth);
        if (!(spec.trap_offset.norm() >= need))
            throw std::invalid_argument("trap: offset norm must be >= K' + sqrt(K'^2 + depth)");
    }
}

double evaluate(const ObjectiveSpec& spec, const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != spec.dimension)
        throw std::invalid_argument("evaluate: expected dimension " + std::to_string(spec.dimension) + ", got " +
                                    std::to_string(x.size()));
    if (spec.translation.size() == 0 && spec.rotation.size() == 0) return base_value(spec, x);
    Vector y = spec.translation.size() == 0 ? x : Vector(x - spec.translation);
    if (spec.rotation.size() != 0) y = spec.rotation.transpose() * y;
    return base_value(spec, y);
}

std::optional<double> known_optimum(const ObjectiveSpec& spec)
{
    switch (spec.function) {
    case Function::Trap: return -spec.trap_depth;
    default: return 0.0;
    }
}

bool is_constant(const ObjectiveSpec& spec) { return spec.function == Function::Plateau && std::isinf(spec.radius); }

ObjectiveSpec make_objective(Function f, std::size_t dimension)
{
    if (f == Function::Trap) throw std::invalid_argument("make_objective: use make_trap for the trap");
    ObjectiveSpec s;
    s.function = f;
    s.dimension = dimension;
    validate(s);
    return s;
}

ObjectiveSpec make_plateau(std::size_t dimension, double radius)
{
    if (!(radius >= 0.0)) throw std::invalid_argument("make_plateau: radius must be >= 0");
    ObjectiveSpec s;
    s.function = Function::Plateau;
    s.dimension = dimension;
    s.radius = radius;
    validate(s);
    return s;
}

ObjectiveSpec make_constant(std::size_t dimension)
{
    return make_plateau(dimension, std::numeric_limits<double>::infinity());
}

ObjectiveSpec make_trap(std::size_t dimension, double local_radius, const Vector& offset, double depth)
{
    ObjectiveSpec s;
    s.function = Function::Trap;
    s.dimension = dimension;
    s.radius = local_radius;
    s.trap_offset = offset;
    s.trap_depth = depth;
    validate(s);
    return s;
}

Matrix random_rotation(std::size_t dimension, Rng& rng)
{
    const auto d = static_cast<Eigen::Index>(dimension);
    Matrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// --- text records ---------------------------------------------------------

std::string ObjectiveRecord::to_string() const
{
    std::ostringstream os;
    os << "fn=" << name << " dim=" << dimension << " seed=" << seed;
    for (const auto& [k, v] : params) os << ' ' << k << '=' << format_double(v);
    return os.str();
}

ObjectiveRecord ObjectiveRecord::parse(std::string_view text)
{
    ObjectiveRecord rec;
    bool have_fn = false, have_dim = false;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
            throw std::invalid_argument("objective record: expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "fn") {
            rec.name = value;
            have_fn = true;
        } else if (key == "dim") {
            const double v = parse_double(value);
            if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("objective record: bad dim " + value);
            rec.dimension = static_cast<std::size_t>(v);
            have_dim = true;
        } else if (key == "seed") {
            try {
                rec.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw std::invalid_argument("objective record: bad seed " + value);
            }
        } else if (key == "translate" || key == "rotate" || key == "radius" || key == "offset" || key == "depth") {
            if (!rec.params.emplace(key, parse_double(value)).second)
                throw std::invalid_argument("objective record: duplicate key " + key);
        } else {
            throw std::invalid_argument("objective record: unknown key " + key);
        }
    }
    if (!have_fn || !have_dim) throw std::invalid_argument("objective record: fn and dim are required");
    if (rec.name != "constant") parse_function(rec.name);
    return rec;
}

ObjectiveSpec ObjectiveRecord::instantiate(std::uint64_t instance) const
{
    auto param = [&](const char* key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };

    ObjectiveSpec spec;
    if (name == "constant") {
        spec = make_constant(dimension);
    } else {
        const Function f = parse_function(name);
        if (f == Function::Plateau) {
            spec = make_plateau(dimension, param("radius", 0.0));
        } else if (f == Function::Trap) {
            const double k = param("radius", 10.0);
            Vector c = Vector::Zero(static_cast<Eigen::Index>(dimension));
            c[0] = param("offset", 4.0 * k);
            spec = make_trap(dimension, k, c, param("depth", 1.0));
        } else {
            spec = make_objective(f, dimension);
        }
    }

    Rng rng = Rng(seed).substream(instance);
    const double scale = param("translate", 0.0);
    if (scale != 0.0) {
        spec.translation.resize(static_cast<Eigen::Index>(dimension));
        for (auto& t : spec.translation) t = scale * (2.0 * rng.uniform() - 1.0);
    }
    if (param("rotate", 0.0) != 0.0) spec.rotation = random_rotation(dimension, rng);
    validate(spec);
    return spec;
}

}  // namespace tbpsa::bench

#include "tbpsa/es_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tbpsa::es {

void validate(const ParentState& parent)
{
    if (!(parent.sigma > 0.0) || !std::isfinite(parent.sigma))
        throw std::invalid_argument("parent sigma must be positive and finite");
    if (!(parent.tau >= 0.0) || !std::isfinite(parent.tau))
        throw std::invalid_argument("parent tau must be non-negative and finite");
    if (parent.center.size() == 0)
        throw std::invalid_argument("parent center must have dimension >= 1");
    if (!parent.center.allFinite())
        throw std::invalid_argument("parent center must be finite");
}

Candidate perturb(const ParentState& parent, double g, const Vector& z)
{
    if (z.size() != parent.center.size())
        throw std::invalid_argument("perturbation dimension does not match the parent");
    // Keep sigma_i representable: a denormal parent sigma times exp(-g) would otherwise underflow to 0.
    const double sigma = std::max(parent.sigma * std::exp(parent.tau * g), std::numeric_limits<double>::min());
    return Candidate{parent.center + sigma * z, sigma};
}

std::vector<Candidate> mutate(const ParentState& parent, std::size_t count, Rng& rng)
{
    if (count == 0) throw std::invalid_argument("mutate: count must be >= 1");
    validate(parent);

    const auto d = parent.center.size();
    std::vector<Candidate> out;
    out.reserve(count);
    Vector z(d);
    for (std::size_t i = 0; i < count; ++i) {
        const double g = rng.normal();
        for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
        out.push_back(perturb(parent, g, z));
    }
    return out;
}

std::vector<std::size_t> select_mu_best(std::span<const EvaluatedCandidate> pool, std::size_t mu, Rng& rng)
{
    if (mu == 0) throw std::invalid_argument("select_mu_best: mu must be >= 1");
    if (mu > pool.size()) throw std::invalid_argument("select_mu_best: mu exceeds pool size");

    std::vector<double> keys(pool.size());
    for (auto& k : keys) k = rng.uniform();

    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto mid = idx.begin() + static_cast<std::ptrdiff_t>(mu);
    std::partial_sort(idx.begin(), mid, idx.end(), [&](std::size_t a, std::size_t b) {
        if (pool[a].fitness != pool[b].fitness) return pool[a].fitness < pool[b].fitness;
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return a < b;
    });
    idx.resize(mu);
    return idx;
}

Recombined recombine(std::span<const EvaluatedCandidate> selected)
{
    if (selected.empty()) throw std::invalid_argument("recombine: empty selection");

    const auto n = static_cast<double>(selected.size());
    Vector center = Vector::Zero(selected.front().candidate.x.size());
    // Log-ratios against the first step-size: equal step-sizes give exactly that step-size back.
    const double ref = selected.front().candidate.sigma;
    double log_ratio = 0.0;
    for (const auto& e : selected) {
        if (e.candidate.x.size() != center.size())
            throw std::invalid_argument("recombine: mixed dimensions");
        center += e.candidate.x;
        log_ratio += std::log(e.candidate.sigma / ref);
    }
    center /= n;
    return {std::move(center), ref * std::exp(log_ratio / n)};
}

}  // namespace tbpsa::es

#include "tbpsa/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tbpsa::bench {

namespace {

bool dominates_weakly(const Vector& p, const Vector& q)
{
    return (p.array() <= q.array()).all();
}

void check_reference(const ParetoSet& set)
{
    if (set.reference.size() < 2) throw std::invalid_argument("hypervolume: need at least two objectives");
    if (!set.reference.allFinite()) throw std::invalid_argument("hypervolume: reference must be finite");
    for (const auto& p : set.points)
        if (p.size() != set.reference.size())
            throw std::invalid_argument("hypervolume: point dimension does not match the reference");
}

}  // namespace

std::vector<Vector> filter_dominating(const ParetoSet& set)
{
    std::vector<Vector> out;
    for (const auto& p : set.points)
        if (p.allFinite() && (p.array() < set.reference.array()).all()) out.push_back(p);
    return out;
}

double hypervolume_2d(const ParetoSet& set)
{
    check_reference(set);
    if (set.reference.size() != 2) throw std::invalid_argument("hypervolume_2d: exactly two objectives required");
    auto pts = filter_dominating(set);
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    // Horizontal slabs: each point that lowers the running second objective adds a slab out to the reference.
    double volume = 0.0;
    double ceiling = set.reference[1];
    for (const auto& p : pts) {
        if (p[1] >= ceiling) continue;
        volume += (set.reference[0] - p[0]) * (ceiling - p[1]);
        ceiling = p[1];
    }
    return volume;
}

HypervolumeEstimate hypervolume_monte_carlo(const ParetoSet& set, std::size_t samples, Rng& rng)
{
    check_reference(set);
    if (samples == 0) throw std::invalid_argument("hypervolume_monte_carlo: samples must be >= 1");
    const auto pts = filter_dominating(set);
    if (pts.empty()) return {0.0, 0.0};

    const auto k = set.reference.size();
    Vector lower = pts.front();
    for (const auto& p : pts) lower = lower.cwiseMin(p);
    const double box = (set.reference - lower).prod();

    std::size_t hits = 0;
    Vector u(k);
    for (std::size_t s = 0; s < samples; ++s) {
        for (Eigen::Index j = 0; j < k; ++j) u[j] = lower[j] + rng.uniform() * (set.reference[j] - lower[j]);
        for (const auto& p : pts)
            if (dominates_weakly(p, u)) {
                ++hits;
                break;
            }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {frac * box, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

HypervolumeScalarizer::HypervolumeScalarizer(std::vector<Objective> objectives, Vector reference,
                                             std::uint64_t seed, std::size_t monte_carlo_samples)
    : objectives_(std::move(objectives))
{
    if (objectives_.size() < 2) throw std::invalid_argument("scalarizer: need at least two objectives");
    if (static_cast<std::size_t>(reference.size()) != objectives_.size())
        throw std::invalid_argument("scalarizer: reference dimension must equal the number of objectives");
    archive_.reference = std::move(reference);
    check_reference(archive_);
    if (objectives_.size() > 2) {
        // Volume is measured inside the unit box [reference - 1, reference), sampled once.
        if (monte_carlo_samples == 0) throw std::invalid_argument("scalarizer: monte_carlo_samples must be >= 1");
        Rng rng(seed);
        const auto k = archive_.reference.size();
        box_volume_ = 1.0;
        samples_.reserve(monte_carlo_samples);
        for (std::size_t s = 0; s < monte_carlo_samples; ++s) {
            Vector u(k);
            for (Eigen::Index j = 0; j < k; ++j) u[j] = archive_.reference[j] - rng.uniform();
            samples_.push_back(std::move(u));
        }
        covered_.assign(samples_.size(), false);
    }
}

double HypervolumeScalarizer::current_volume() const
{
    if (objectives_.size() == 2) return hypervolume_2d(archive_);
    return box_volume_ * static_cast<double>(covered_count_) / static_cast<double>(samples_.size());
}

double HypervolumeScalarizer::operator()(const Vector& x)
{
    Vector y(static_cast<Eigen::Index>(objectives_.size()));
    for (std::size_t j = 0; j < objectives_.size(); ++j) y[static_cast<Eigen::Index>(j)] = objectives_[j](x);
    if (!y.allFinite()) throw std::invalid_argument("scalarizer: objective returned a non-finite value");

    if ((y.array() < archive_.reference.array()).all()) {
        archive_.points.push_back(y);
        if (!samples_.empty())
            for (std::size_t s = 0; s < samples_.size(); ++s)
                if (!covered_[s] && dominates_weakly(y, samples_[s])) {
                    covered_[s] = true;
                    ++covered_count_;
                }
    }
    return -current_volume();
}

}  // namespace tbpsa::bench

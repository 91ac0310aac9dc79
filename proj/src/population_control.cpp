#include "tbpsa/population_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tbpsa::population {

void FitnessArchive::append(const ArchiveEntry& e)
{
    if (!entries_.empty() && e.eval_index <= entries_.back().eval_index)
        throw std::invalid_argument("fitness archive: eval_index must be strictly increasing");
    entries_.push_back(e);
}

void FitnessArchive::trim(std::size_t lambda)
{
    const std::size_t capacity = window_factor * lambda;
    while (entries_.size() > capacity) entries_.pop_front();
}

void FitnessArchive::push(std::span<const EvaluatedCandidate> batch, std::size_t lambda)
{
    std::vector<ArchiveEntry> tmp;
    tmp.reserve(batch.size());
    for (const auto& e : batch) tmp.push_back({e.eval_index, e.fitness});
    push(std::span<const ArchiveEntry>(tmp), lambda);
}

void FitnessArchive::push(std::span<const ArchiveEntry> batch, std::size_t lambda)
{
    if (lambda == 0) throw std::invalid_argument("fitness archive: lambda must be >= 1");
    // Validate the whole batch first so a bad batch leaves the archive untouched.
    std::uint64_t last = entries_.empty() ? 0 : entries_.back().eval_index;
    bool have_last = !entries_.empty();
    for (const auto& e : batch) {
        if (have_last && e.eval_index <= last)
            throw std::invalid_argument("fitness archive: eval_index must be strictly increasing");
        last = e.eval_index;
        have_last = true;
    }
    for (const auto& e : batch) append(e);
    trim(lambda);
}

const char* to_string(Decision d)
{
    switch (d) {
    case Decision::Stagnating: return "stagnating";
    case Decision::Progressing: return "progressing";
    case Decision::Insufficient: return "insufficient";
    }
    return "?";
}

Decision stagnation_test(const FitnessArchive& archive, std::size_t lambda)
{
    if (lambda == 0) throw std::invalid_argument("stagnation_test: lambda must be >= 1");
    const auto& e = archive.entries();
    const std::size_t window = window_factor * lambda;
    if (e.size() < window) return Decision::Insufficient;

    const std::size_t first = e.size() - window;
    const std::size_t last = e.size() - lambda;
    const auto n = static_cast<double>(lambda);

    double mean_old = 0.0, mean_new = 0.0;
    for (std::size_t i = 0; i < lambda; ++i) {
        mean_old += e[first + i].fitness;
        mean_new += e[last + i].fitness;
    }
    mean_old /= n;
    mean_new /= n;

    double ss_old = 0.0, ss_new = 0.0;
    for (std::size_t i = 0; i < lambda; ++i) {
        ss_old += (e[first + i].fitness - mean_old) * (e[first + i].fitness - mean_old);
        ss_new += (e[last + i].fitness - mean_new) * (e[last + i].fitness - mean_new);
    }
    const double var_old = lambda > 1 ? ss_old / (n - 1.0) : 0.0;
    const double var_new = lambda > 1 ? ss_new / (n - 1.0) : 0.0;

    const double delta = std::abs(mean_old - mean_new);
    const double spread = std::sqrt(var_old / n + var_new / n);
    return delta > 2.0 * spread ? Decision::Progressing : Decision::Stagnating;
}

PopulationSize::PopulationSize(std::size_t lambda_init, std::size_t num_workers)
    : anchor_(static_cast<double>(lambda_init)),
      lambda_init_(lambda_init),
      num_workers_(num_workers)
{
    if (lambda_init == 0) throw std::invalid_argument("population: lambda_init must be >= 1");
    if (num_workers == 0) throw std::invalid_argument("population: num_workers must be >= 1");
    clamp();
}

std::size_t PopulationSize::floor() const noexcept { return std::max(lambda_init_, num_workers_); }

double PopulationSize::lambda_real() const
{
    return anchor_ * std::exp2(static_cast<double>(quarter_steps_) / 4.0);
}

std::size_t PopulationSize::lambda() const
{
    return std::max(floor(), static_cast<std::size_t>(std::llround(lambda_real())));
}

std::size_t PopulationSize::mu() const
{
    const auto m = static_cast<std::size_t>(std::llround(mu_real()));
    return std::clamp<std::size_t>(m, 1, lambda());
}

void PopulationSize::clamp()
{
    const auto lo = static_cast<double>(floor());
    if (lambda_real() < lo) {
        anchor_ = lo;
        quarter_steps_ = 0;
    }
}

void PopulationSize::update(Decision decision)
{
    switch (decision) {
    case Decision::Stagnating:
        quarter_steps_ += 4;
        break;
    case Decision::Progressing:
        quarter_steps_ -= 1;
        break;
    case Decision::Insufficient:
        return;
    }
    clamp();
}

}  // namespace tbpsa::population

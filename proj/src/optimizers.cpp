#include "tbpsa/optimizers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace tbpsa {

std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Tbpsa: return "TBPSA";
    case Algorithm::NaiveTbpsa: return "NaiveTBPSA";
    case Algorithm::OnePlusOne: return "OnePlusOne";
    case Algorithm::RandomSearch: return "RandomSearch";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name)
{
    std::string key;
    for (char c : name)
        if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "tbpsa") return Algorithm::Tbpsa;
    if (key == "naivetbpsa") return Algorithm::NaiveTbpsa;
    if (key == "oneplusone" || key == "1+1") return Algorithm::OnePlusOne;
    if (key == "randomsearch") return Algorithm::RandomSearch;
    throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

void OptimizerConfig::validate() const
{
    if (dimension == 0) throw std::invalid_argument("optimizer: dimension must be >= 1");
    if (budget == 0) throw std::invalid_argument("optimizer: budget must be >= 1");
    if (num_workers == 0) throw std::invalid_argument("optimizer: num_workers must be >= 1");
    if (num_workers > budget) throw std::invalid_argument("optimizer: num_workers must not exceed budget");
    if (initial_center.size() != 0 && static_cast<std::size_t>(initial_center.size()) != dimension)
        throw std::invalid_argument("optimizer: initial_center has the wrong dimension");
    if (!initial_center.allFinite()) throw std::invalid_argument("optimizer: initial_center must be finite");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("optimizer: tau must be finite and >= 0");
}

namespace {

Vector start_point(const OptimizerConfig& c)
{
    return c.initial_center.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(c.dimension)) : c.initial_center;
}

}  // namespace

Optimizer::Optimizer(const OptimizerConfig& config) : config_(config), rng_(config.seed)
{
    config_.validate();
    if (config_.initial_center.size() == 0) config_.initial_center = start_point(config_);
}

std::vector<Proposal> Optimizer::ask(std::size_t max_batch)
{
    if (exhausted()) throw BudgetExhausted("ask: evaluation budget exhausted");
    if (max_batch == 0) throw std::invalid_argument("ask: max_batch must be >= 1");

    const std::size_t n = std::min({max_batch, room_in_generation(), remaining_budget()});
    std::vector<Proposal> out;
    if (n == 0) return out;
    auto candidates = sample(n);
    out.reserve(candidates.size());
    for (auto& c : candidates) {
        const auto id = static_cast<std::uint64_t>(asked_++);
        pending_.emplace(id, c);
        out.push_back({id, std::move(c)});
    }
    return out;
}

void Optimizer::tell(std::span<const EvaluatedCandidate> results)
{
    // Validate everything before touching state.
    std::vector<std::uint64_t> ids;
    ids.reserve(results.size());
    for (const auto& r : results) {
        if (!pending_.contains(r.eval_index))
            throw std::invalid_argument("tell: unknown or already told eval_index " + std::to_string(r.eval_index));
        if (!std::isfinite(r.fitness))
            throw std::invalid_argument("tell: non-finite fitness for eval_index " + std::to_string(r.eval_index));
        ids.push_back(r.eval_index);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::invalid_argument("tell: duplicate eval_index in batch");

    std::vector<EvaluatedCandidate> sorted;
    sorted.reserve(results.size());
    for (const auto& r : results) {
        auto node = pending_.extract(r.eval_index);
        sorted.push_back({std::move(node.mapped()), r.fitness, r.eval_index});
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.eval_index < b.eval_index; });

    for (const auto& e : sorted) {
        if (!best_ || e.fitness < best_->fitness ||
            (e.fitness == best_->fitness && e.eval_index < best_->eval_index))
            best_ = BestSoFar{e.candidate.x, e.fitness, e.eval_index};
    }
    told_ += sorted.size();
    learn(sorted);
}

// --- TBPSA ------------------------------------------------------------------

Tbpsa::Tbpsa(const OptimizerConfig& config)
    : Optimizer(config),
      sizes_(4 * config.dimension, config.num_workers),
      generation_lambda_(0)
{
    if (config_.algorithm != Algorithm::Tbpsa && config_.algorithm != Algorithm::NaiveTbpsa)
        throw std::invalid_argument("Tbpsa: algorithm must be TBPSA or NaiveTBPSA");
    parent_.center = config_.initial_center;
    parent_.sigma = 1.0 / std::sqrt(static_cast<double>(config_.dimension));
    parent_.tau = config_.tau;
    generation_lambda_ = sizes_.lambda();
}

std::size_t Tbpsa::room_in_generation() const { return generation_lambda_ - handed_out_; }

std::vector<Candidate> Tbpsa::sample(std::size_t count)
{
    handed_out_ += count;
    return es::mutate(parent_, count, rng_);
}

void Tbpsa::learn(std::span<const EvaluatedCandidate> results)
{
    current_.insert(current_.end(), results.begin(), results.end());
    if (current_.size() == generation_lambda_) finish_generation();
}

void Tbpsa::finish_generation()
{
    using namespace population;
    std::sort(current_.begin(), current_.end(),
              [](const auto& a, const auto& b) { return a.eval_index < b.eval_index; });

    const std::size_t lambda = generation_lambda_;
    const std::size_t mu = sizes_.mu();
    archive_.push(std::span<const EvaluatedCandidate>(current_), lambda);

    const auto chosen = es::select_mu_best(current_, mu, rng_);
    std::vector<EvaluatedCandidate> selected;
    selected.reserve(chosen.size());
    for (auto i : chosen) selected.push_back(current_[i]);
    auto next = es::recombine(selected);
    parent_.center = std::move(next.center);
    parent_.sigma = next.sigma;
    ++parent_.generation;

    last_decision_ = config_.force_doubling ? Decision::Stagnating : stagnation_test(archive_, lambda);
    sizes_.update(*last_decision_);

    last_sigmas_.clear();
    for (const auto& e : current_) last_sigmas_.push_back(e.candidate.sigma);
    current_.clear();
    handed_out_ = 0;
    generation_lambda_ = sizes_.lambda();
}

Vector Tbpsa::recommend() const
{
    if (config_.algorithm == Algorithm::NaiveTbpsa) {
        if (!best()) throw NoRecommendation("NaiveTBPSA: nothing evaluated yet");
        return best()->point;
    }
    if (parent_.generation == 0) throw NoRecommendation("TBPSA: no complete generation yet");
    return parent_.center;
}

// --- (1+1)-ES ---------------------------------------------------------------

void one_plus_one_step(OnePlusOneState& state, const EvaluatedCandidate& child)
{
    if (child.fitness <= state.fitness) {
        state.parent = child.candidate.x;
        state.fitness = child.fitness;
        state.sigma *= 2.0;
    } else {
        state.sigma *= std::exp2(-0.25);
    }
    state.sigma = std::clamp(state.sigma, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
}

OnePlusOne::OnePlusOne(const OptimizerConfig& config)
    : Optimizer(config),
      state_{config_.initial_center, std::numeric_limits<double>::infinity(),
             1.0 / std::sqrt(static_cast<double>(config_.dimension))}
{
    if (config_.algorithm != Algorithm::OnePlusOne) throw std::invalid_argument("OnePlusOne: wrong algorithm tag");
}

std::size_t OnePlusOne::room_in_generation() const { return std::numeric_limits<std::size_t>::max(); }

std::vector<Candidate> OnePlusOne::sample(std::size_t count)
{
    std::vector<Candidate> out;
    out.reserve(count);
    if (!center_proposed_) {
        out.push_back({state_.parent, state_.sigma});
        center_proposed_ = true;
    }
    const auto d = state_.parent.size();
    while (out.size() < count) {
        Vector z(d);
        for (Eigen::Index k = 0; k < d; ++k) z[k] = rng_.normal();
        out.push_back({state_.parent + state_.sigma * z, state_.sigma});
    }
    return out;
}

void OnePlusOne::learn(std::span<const EvaluatedCandidate> results)
{
    for (const auto& r : results) {
        if (r.eval_index == 0) {
            // The initial center: establishes the parent fitness without a step-size update.
            if (r.fitness <= state_.fitness) {
                state_.parent = r.candidate.x;
                state_.fitness = r.fitness;
            }
            continue;
        }
        one_plus_one_step(state_, r);
    }
    ++batches_;
}

Vector OnePlusOne::recommend() const
{
    if (!best()) throw NoRecommendation("OnePlusOne: nothing evaluated yet");
    return best()->point;
}

// --- random search ----------------------------------------------------------

RandomSearch::RandomSearch(const OptimizerConfig& config) : Optimizer(config), center_(config_.initial_center)
{
    if (config_.algorithm != Algorithm::RandomSearch) throw std::invalid_argument("RandomSearch: wrong algorithm tag");
}

std::size_t RandomSearch::room_in_generation() const { return std::numeric_limits<std::size_t>::max(); }

Candidate RandomSearch::random_search_step()
{
    Vector x(center_.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = center_[k] + rng_.normal();
    return {std::move(x), 1.0};
}

std::vector<Candidate> RandomSearch::sample(std::size_t count)
{
    std::vector<Candidate> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(random_search_step());
    return out;
}

void RandomSearch::learn(std::span<const EvaluatedCandidate>) { ++batches_; }

Vector RandomSearch::recommend() const
{
    if (!best()) throw NoRecommendation("RandomSearch: nothing evaluated yet");
    return best()->point;
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config)
{
    switch (config.algorithm) {
    case Algorithm::Tbpsa:
    case Algorithm::NaiveTbpsa: return std::make_unique<Tbpsa>(config);
    case Algorithm::OnePlusOne: return std::make_unique<OnePlusOne>(config);
    case Algorithm::RandomSearch: return std::make_unique<RandomSearch>(config);
    }
    throw std::invalid_argument("make_optimizer: unknown algorithm");
}

}  // namespace tbpsa

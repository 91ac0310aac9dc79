#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "tbpsa/es_core.hpp"
#include "tbpsa/rng.hpp"
#include "tbpsa/stats.hpp"

using namespace tbpsa;

namespace {

ParentState parent_at(std::size_t d, double sigma, double tau)
{
    ParentState p;
    p.center = Vector::Zero(static_cast<Eigen::Index>(d));
    p.sigma = sigma;
    p.tau = tau;
    return p;
}

std::vector<EvaluatedCandidate> pool_from(const std::vector<double>& fitness)
{
    std::vector<EvaluatedCandidate> pool;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        Candidate c{Vector::Constant(1, static_cast<double>(i)), 1.0};
        pool.push_back({c, fitness[i], i});
    }
    return pool;
}

}  // namespace

TEST_CASE("perturb with zero noise returns the parent")
{
    auto p = parent_at(2, 1.0, 1.0);
    const auto c = es::perturb(p, 0.0, Vector::Zero(2));
    CHECK(c.x == Vector::Zero(2));
    CHECK(c.sigma == 1.0);
}

TEST_CASE("perturb follows the lognormal mutation formula")
{
    auto p = parent_at(2, 0.5, 0.7);
    p.center << 1.0, -2.0;
    Vector z(2);
    z << 0.3, -1.1;
    const auto c = es::perturb(p, 0.4, z);
    const double s = 0.5 * std::exp(0.7 * 0.4);
    CHECK(c.sigma == doctest::Approx(s).epsilon(1e-15));
    CHECK(c.x[0] == doctest::Approx(1.0 + s * 0.3).epsilon(1e-15));
    CHECK(c.x[1] == doctest::Approx(-2.0 - s * 1.1).epsilon(1e-15));
}

TEST_CASE("mutate rejects bad input")
{
    Rng rng(1);
    auto p = parent_at(2, 1.0, 1.0);
    CHECK_THROWS_AS(es::mutate(p, 0, rng), std::invalid_argument);
    p.sigma = std::nan("");
    CHECK_THROWS_AS(es::mutate(p, 3, rng), std::invalid_argument);
    p = parent_at(2, 1.0, 1.0);
    p.center[1] = INFINITY;
    CHECK_THROWS_AS(es::mutate(p, 3, rng), std::invalid_argument);
    p = parent_at(2, -1.0, 1.0);
    CHECK_THROWS_AS(es::mutate(p, 3, rng), std::invalid_argument);
}

TEST_CASE("mutate consumes one scale normal then d coordinate normals per candidate")
{
    auto p = parent_at(3, 0.8, 1.0);
    Rng a(42);
    const auto batch = es::mutate(p, 4, a);
    Rng b(42);
    for (const auto& c : batch) {
        const double g = b.normal();
        Vector z(3);
        for (int k = 0; k < 3; ++k) z[k] = b.normal();
        const auto expected = es::perturb(p, g, z);
        CHECK(c.x == expected.x);
        CHECK(c.sigma == expected.sigma);
    }
}

TEST_CASE("mutate is deterministic for a fixed seed")
{
    auto p = parent_at(4, 0.3, 1.0);
    Rng a(7), b(7);
    const auto x = es::mutate(p, 10, a);
    const auto y = es::mutate(p, 10, b);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i].x == y[i].x);
        CHECK(x[i].sigma == y[i].sigma);
    }
}

TEST_CASE("lognormal step-size has mean e^{1/2}")
{
    auto p = parent_at(1, 1.0, 1.0);
    Rng rng(2024);
    const auto batch = es::mutate(p, 1000000, rng);
    std::vector<double> s;
    s.reserve(batch.size());
    for (const auto& c : batch) s.push_back(c.sigma);
    const double m = stats::mean(s);
    const double se = stats::standard_error(s);
    CHECK(std::abs(m - std::exp(0.5)) <= 3.0 * se);
}

TEST_CASE("mutation is unbiased around the center")
{
    auto p = parent_at(3, 0.7, 1.0);
    p.center << 5.0, -1.0, 2.0;
    Rng rng(11);
    const auto batch = es::mutate(p, 100000, rng);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> dev;
        dev.reserve(batch.size());
        for (const auto& c : batch) dev.push_back(c.x[k] - p.center[k]);
        CHECK(std::abs(stats::mean(dev)) <= 4.0 * stats::standard_error(dev));
    }
}

TEST_CASE("log step-size ratio is normal with variance tau^2")
{
    for (double tau : {0.5, 1.0}) {
        auto p = parent_at(2, 0.3, tau);
        Rng rng(99);
        const auto batch = es::mutate(p, 100000, rng);
        std::vector<double> l;
        for (const auto& c : batch) l.push_back(std::log(c.sigma) - std::log(p.sigma));
        CHECK(std::abs(stats::mean(l)) <= 4.0 * stats::standard_error(l));
        CHECK(stats::sample_variance(l) == doctest::Approx(tau * tau).epsilon(0.05));
    }
}

TEST_CASE("select_mu_best orders by fitness")
{
    Rng rng(0);
    const auto pool = pool_from({3.0, 1.0, 2.0});
    const auto idx = es::select_mu_best(pool, 2, rng);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 2);
    CHECK_THROWS_AS(es::select_mu_best(pool, 4, rng), std::invalid_argument);
}

TEST_CASE("ties are broken uniformly")
{
    Rng rng(5);
    const auto pool = pool_from({1.0, 1.0, 2.0});
    int first = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto idx = es::select_mu_best(pool, 1, rng);
        REQUIRE(idx[0] < 2);
        if (idx[0] == 0) ++first;
    }
    CHECK(std::abs(first / double(trials) - 0.5) <= 0.02);
}

TEST_CASE("constant fitness gives uniform inclusion")
{
    Rng rng(6);
    const auto pool = pool_from(std::vector<double>(20, 4.0));
    std::vector<int> hits(20, 0);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
        for (auto i : es::select_mu_best(pool, 5, rng)) ++hits[i];
    for (int h : hits) CHECK(std::abs(h / double(trials) - 0.25) <= 0.02);
}

TEST_CASE("selection is invariant under strictly increasing transforms")
{
    Rng gen(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> f(30);
        for (auto& v : f) v = std::floor(gen.uniform() * 10.0);  // forces ties
        std::vector<double> g(f.size()), h(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            g[i] = std::exp(f[i]);
            h[i] = 3.0 * f[i] + 7.0;
        }
        Rng r1(rep), r2(rep), r3(rep);
        const auto a = es::select_mu_best(pool_from(f), 8, r1);
        const auto b = es::select_mu_best(pool_from(g), 8, r2);
        const auto c = es::select_mu_best(pool_from(h), 8, r3);
        CHECK(a == b);
        CHECK(a == c);
    }
}

TEST_CASE("recombine examples")
{
    std::vector<EvaluatedCandidate> one{{{Vector::Zero(2), 2.0}, 0.0, 0}};
    one[0].candidate.x << 3.0, 4.0;
    auto r = es::recombine(one);
    CHECK(r.center == one[0].candidate.x);
    CHECK(r.sigma == 2.0);

    std::vector<EvaluatedCandidate> two{{{Vector::Zero(2), 1.0}, 0.0, 0}, {{Vector::Constant(2, 2.0), 4.0}, 0.0, 1}};
    r = es::recombine(two);
    CHECK(r.center[0] == doctest::Approx(1.0));
    CHECK(r.center[1] == doctest::Approx(1.0));
    CHECK(r.sigma == doctest::Approx(2.0).epsilon(1e-14));

    CHECK_THROWS_AS(es::recombine(std::span<const EvaluatedCandidate>{}), std::invalid_argument);
}

TEST_CASE("geometric mean of many lognormal step-sizes concentrates near 1")
{
    Rng rng(17);
    int inside = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<EvaluatedCandidate> pool(1000);
        for (auto& e : pool) e.candidate = {Vector::Zero(1), std::exp(rng.normal())};
        if (std::abs(std::log(es::recombine(pool).sigma)) <= 0.1) ++inside;
    }
    CHECK(inside >= 990);
}

TEST_CASE("tau zero keeps sigma exactly")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto p = parent_at(3, 0.1 + 0.37 * static_cast<double>(seed), 0.0);
        const auto batch = es::mutate(p, 12, rng);
        std::vector<EvaluatedCandidate> pool;
        for (std::size_t i = 0; i < batch.size(); ++i) pool.push_back({batch[i], 0.0, i});
        CHECK(es::recombine(pool).sigma == p.sigma);
    }
}

TEST_CASE("rng substreams are independent of call order")
{
    Rng root(123);
    const auto a = root.substream(5).key();
    (void)root.substream(9);
    CHECK(root.substream(5).key() == a);
    CHECK(root.substream(5).key() != root.substream(6).key());
    Rng x = root.substream(5), y = root.substream(5);
    for (int i = 0; i < 10; ++i) CHECK(x.bits() == y.bits());
}

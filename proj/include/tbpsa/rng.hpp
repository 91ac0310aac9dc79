#pragma once

#include <cstdint>
#include <random>

namespace tbpsa {

/// SplitMix64 finalizer. Used to derive independent stream keys.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/**
 * Seeded random stream with deterministic substreams.
 *
 * A stream is identified by a 64-bit key. substream(i) derives a new key
 * from (key, i) without touching the parent's state, so parallel work that
 * asks for substream(run_index) is reproducible regardless of scheduling.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    [[nodiscard]] Rng substream(std::uint64_t index) const;
    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    double normal();
    double uniform();  // [0, 1)
    std::uint64_t bits() { return engine_(); }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace tbpsa

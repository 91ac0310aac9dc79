#include "tbpsa/rng.hpp"

#include <array>

namespace tbpsa {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    std::uint64_t z = x + UINT64_C(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t key)
{
    // Expand the key to a full seed_seq so nearby keys do not give correlated mt states.
    std::array<std::uint32_t, 8> words{};
    std::uint64_t s = key;
    for (std::size_t i = 0; i < words.size(); i += 2) {
        s = splitmix64(s);
        words[i] = static_cast<std::uint32_t>(s);
        words[i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(seed), engine_(seeded_engine(seed)) {}

Rng Rng::substream(std::uint64_t index) const
{
    return Rng(splitmix64(key_ ^ splitmix64(index + UINT64_C(0xD1B54A32D192ED03))));
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return uniform_(engine_); }

}  // namespace tbpsa

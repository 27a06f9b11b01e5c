#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace algan {

// splitmix64 step; used to derive independent sub-seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed for substream `stream` of a root seed. Distinct streams
// (data, init, training, ...) stay decoupled when one of them changes.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

inline void fill_gaussian(std::span<double> out, std::mt19937_64& rng,
                          double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    for (double& v : out) v = dist(rng);
}

// Unbiased draw from [0, n) by rejection; avoids distribution objects whose
// sequences vary across standard libraries.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    std::uint64_t range = n;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / range * range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace algan

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hamlearn {

// Deterministic RNG facade. All distribution transforms are implemented here
// rather than with std::*_distribution, whose output is implementation-defined;
// datasets must be bit-reproducible across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform double in [0, 1) with 53 random bits
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v < n ? v : n - 1;
    }

    // Box-Muller without caching: one value per call, two uniforms consumed
    double normal(double mean, double sigma) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
        return mean + sigma * z;
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Derives an independent stream seed from a master seed and a list of indices
// (stream tag, task indices, ...). Every parallel task and every record gets
// its own derived seed so results are independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = master;
    std::uint64_t h = detail::splitmix64(state);
    for (std::uint64_t p : parts) {
        state ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h = detail::splitmix64(state);
    }
    return h;
}

// Stream tags for derive_seed; fixed values are part of the dataset wire format.
namespace seed_stream {
inline constexpr std::uint64_t bases = 1;
inline constexpr std::uint64_t spread = 2;
inline constexpr std::uint64_t sample = 3;
inline constexpr std::uint64_t model = 4;
inline constexpr std::uint64_t cell = 5;
inline constexpr std::uint64_t net = 6;
inline constexpr std::uint64_t fisher = 7;
}  // namespace seed_stream

}  // namespace hamlearn

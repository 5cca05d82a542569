#ifndef CLIMARISK_RNG_HPP
#define CLIMARISK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

namespace climarisk {

/// Seeded PRNG (xoshiro256** with splitmix64 seeding).
///
/// The standard library distributions are implementation-defined, so every
/// random draw in the toolkit goes through this class to keep runs
/// reproducible: the same seed yields the same byte-identical outputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    /// Independent stream for e.g. per-trial Monte Carlo seeds.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        x = stream + 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64(x);
        return Rng(a ^ (b + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    /// Unbiased integer in [0,n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < threshold);
        return r % n;
    }

    /// Box-Muller. Always consumes exactly two uniform draws, so the
    /// stream position is a pure function of the call count.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
};

} // namespace climarisk

#endif // CLIMARISK_RNG_HPP

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace wrsn {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic RNG. std::mt19937_64 has a portable bit stream; the real and
// normal transforms are hand-rolled because the standard distributions are
// implementation-defined, and replay determinism requires a fixed algorithm.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : root_(seed), eng_(splitmix64(seed)) {}

    std::uint64_t seed() const { return root_; }

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1) with 53 random bits
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), unbiased
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t lim = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= lim);
        return v % n;
    }

    // standard normal via Marsaglia polar (no libm trig)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // independent child stream; deterministic in (seed, tag)
    Rng fork(std::uint64_t tag) const {
        return Rng(splitmix64(root_ ^ splitmix64(tag + 0x51ed2701)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t root_;
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wrsn

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qkd {

// splitmix64 finalizer; used to derive independent stream seeds from
// (base seed, purpose tag) so every consumer gets its own reproducible stream.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return mix64(base ^ mix64(tag));
}

// mt19937_64 with an explicit Box-Muller transform. std::normal_distribution
// is implementation-defined, which would break the same-seed-same-sequence
// contract across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in (0,1); never returns an exact 0 so log() below is safe
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double two_pi = 6.283185307179586476925286766559;
        double r = std::sqrt(-2.0 * std::log(uniform()));
        double a = two_pi * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t bits() { return eng_(); }

    // unbiased uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t lim = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= lim);
        return v % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qkd

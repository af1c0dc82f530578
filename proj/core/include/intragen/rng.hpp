#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace intragen {

// splitmix64 finalizer; also used to derive independent streams from one root
// seed so that adding a stream never perturbs the draws of existing ones.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// Stream seed for (root seed, module name). All tool randomness is derived
// through this single function.
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view name) {
    std::uint64_t s = seed ^ fnv1a64(name);
    return splitmix64(s);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    std::uint64_t s = derive_stream(seed, name) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(s);
}

// Deterministic PRNG with explicit state; avoids std:: distributions whose
// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1) with 53 bits of precision
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller; caches the second draw of each pair
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace intragen

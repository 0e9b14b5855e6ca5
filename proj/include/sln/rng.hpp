#ifndef SLN_RNG_HPP_
#define SLN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sln/common.hpp"

namespace sln {

/// Deterministic random source. The engine (std::mt19937_64) is fully
/// specified by the standard; the value mappings below are our own, so a
/// given seed produces the same stream on every platform and compiler.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    uint64_t uniform_int(uint64_t n) {
        // Rejection sampling keeps the distribution exact.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seed for a named sub-stream of a root seed (fold index, stage name, ...).
inline uint64_t derive_seed(uint64_t root, std::string_view name, uint64_t index = 0) {
    uint64_t h = fnv1a64(&root, sizeof(root));
    h = fnv1a64(name, h);
    h = fnv1a64(&index, sizeof(index), h);
    return h;
}

}  // namespace sln

#endif  // SLN_RNG_HPP_

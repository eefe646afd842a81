#ifndef PONMPC_RNG_HPP
#define PONMPC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace ponmpc {

// splitmix64: cheap seed expander / stream splitter.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic generator with explicit inverse-transform sampling so traces
// are bit-identical regardless of the standard library in use
// (std::*_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(splitmix64(seed)) {
        if (s_ == 0) s_ = 0x6a09e667f3bcc909ULL;
    }

    std::uint64_t next_u64() {
        // xorshift64*
        s_ ^= s_ >> 12;
        s_ ^= s_ << 25;
        s_ ^= s_ >> 27;
        return s_ * 0x2545f4914f6cdd1dULL;
    }

    // uniform in (0, 1]
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // uniform integer in [lo, hi]
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Pareto with minimum `scale` and shape `alpha`: P(X >= x) = (scale/x)^alpha.
    double pareto(double scale, double alpha) {
        return scale * std::pow(uniform01(), -1.0 / alpha);
    }

    // standard normal via Box-Muller (one value per call, cached pair)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * 3.14159265358979323846 * v;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t s_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable per-stream seed derivation (onu/class/source etc.).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(base ^ 0x517cc1b727220a95ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b + 0x2545f4914f6cdd1dULL));
    h = splitmix64(h ^ (c + 0x9e3779b97f4a7c15ULL));
    return h;
}

} // namespace ponmpc

#endif

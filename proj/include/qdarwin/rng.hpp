// rng.hpp — Counter-based deterministic PRNG with named streams.
//
// All randomness in the toolkit funnels through Prng. Streams are derived by
// mixing a seed with a stream name and salts, so independent consumers
// (coefficient draws, Haar states, fragment sampling) never share state and
// results are reproducible regardless of evaluation order or worker count.
//
// Documented streams:
//   "coefficients" / trial seed   — per-instance coupling draws
//   "haar"         / state seed   — random initial-state construction
//   "fragments"    / master seed  — fragment subset sampling

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace qdarwin {

namespace detail {

// splitmix64 finalizer: the mixing core for both stream derivation and draws.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

class Prng {
public:
    explicit Prng(std::uint64_t seed) : state_(detail::mix64(seed)) {}

    // Stream constructor: seed x name x optional salts.
    static Prng stream(std::uint64_t seed, std::string_view name,
                       std::uint64_t salt0 = 0, std::uint64_t salt1 = 0) {
        std::uint64_t s = detail::mix64(seed ^ detail::hash_name(name));
        s = detail::mix64(s ^ salt0);
        s = detail::mix64(s ^ salt1);
        return Prng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // +magnitude or -magnitude with equal probability.
    double rademacher(double magnitude) {
        return (next_u64() >> 63) ? magnitude : -magnitude;
    }

    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift rejection-free mapping; bias is negligible for the
        // n << 2^64 used here (combination counts).
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qdarwin

#include "flexgrid/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flexgrid {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

double Rng::next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + next_double() * (hi - lo);
}

double Rng::uniform_open(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_open: empty interval");
    double v;
    do {
        v = lo + next_double() * (hi - lo);
    } while (v <= lo || v >= hi);
    return v;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_()); // full 64-bit range
    const std::uint64_t rem = (UINT64_MAX % span + 1) % span;   // 2^64 mod span
    const std::uint64_t limit = UINT64_MAX - rem;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x > limit);
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal() {
    double u1;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace flexgrid

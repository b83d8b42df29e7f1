#pragma once

#include <cstdint>
#include <random>

namespace flexgrid {

// Finalizer step of the splitmix64 generator. Used to mix tags into seeds when
// deriving independent child streams.
std::uint64_t splitmix64(std::uint64_t x);

// Combine a master seed with up to three stream tags (run, generation,
// solution index and the like). Distinct tags give streams that behave
// independently, so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Every random draw in the toolkit goes through this wrapper. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// real-valued transforms are implemented here because the <random>
// distributions are implementation-defined and would break cross-platform
// reproducibility of seeded runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1): top 53 bits of one engine draw scaled by 2^-53
    double next_double();

    // uniform in [lo, hi)
    double uniform(double lo, double hi);

    // uniform in the open interval (lo, hi); redraws the (measure-zero) edge
    // cases so neither endpoint can be returned
    double uniform_open(double lo, double hi);

    // uniform integer in [lo, hi], both ends included; rejection sampling, no
    // modulo bias
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // standard normal via Box-Muller, cosine branch only. Consumes exactly two
    // engine draws per call (a zero first draw is redrawn, probability 2^-53).
    double normal();

private:
    std::mt19937_64 engine_;
};

} // namespace flexgrid

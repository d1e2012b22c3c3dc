#ifndef LOCALCLT_RNG_HPP
#define LOCALCLT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace localclt {

// splitmix64 step, used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, stream). Replicate r of a
// Monte Carlo run always uses derive_seed(master, r), so results do not
// depend on how replicates are assigned to workers.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xd1342543de82ef95ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Deterministic generator wrapper. The raw engine is mt19937_64 (the standard
// pins its output sequence); all real-valued mappings are implemented here
// explicitly, since the std::*_distribution algorithms are
// implementation-defined and would break bit-reproducibility guarantees.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on [0, 1), 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe as a log() argument
    double uniform01_open0() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

    double rademacher() { return (eng_() & 1ULL) ? 1.0 : -1.0; }

    // standard normal via Box-Muller; one spare value is cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01_open0();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform01_open0()); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace localclt

#endif

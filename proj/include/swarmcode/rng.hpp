#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace swarmcode {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Order-sensitive mix of several words into one seed, e.g.
// derive_seed({master, generation, genome_id, trial}).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Seeded random stream. Distribution code is local so that draws are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [lo, hi] inclusive.
    int uniform_int(int lo, int hi);
    std::size_t index(std::size_t n);

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes two uniforms per call.
    double normal(double mean, double sigma);

    std::string state() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
};

}  // namespace swarmcode

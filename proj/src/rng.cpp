#include "swarmcode/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace swarmcode {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

std::size_t Rng::index(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("Rng::index: empty range");
    // Rejection sampling removes modulo bias.
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % range);
}

int Rng::uniform_int(int lo, int hi)
{
    if (hi < lo)
        throw std::invalid_argument("Rng::uniform_int: hi < lo");
    return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
}

double Rng::normal(double mean, double sigma)
{
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 1e-300)
        u1 = 1e-300;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sigma * z;
}

std::string Rng::state() const
{
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::restore(const std::string& state)
{
    std::istringstream is(state);
    is >> engine_;
    if (!is)
        throw std::runtime_error("Rng::restore: malformed engine state");
}

}  // namespace swarmcode

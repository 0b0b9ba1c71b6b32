#include "bdcs/rng.hpp"

#include <cmath>

namespace bdcs {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t h = splitmix64(root);
    for (auto t : tags)
        h = splitmix64(h ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
    return h;
}

RandomStream::RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> tags)
    : engine_(derive_seed(root, tags))
{
}

double RandomStream::uniform()
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

int RandomStream::uniform_int(int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

double RandomStream::normal()
{
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
}

std::complex<double> RandomStream::complex_normal(double variance)
{
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

} // namespace bdcs

#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace bdcs {

/// Mixes a root seed with a path of stream tags into an independent 64-bit
/// seed (splitmix64 finalizer applied per tag). Same inputs, same output.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

/// A reproducible random stream addressed by (root seed, tag path).
class RandomStream
{
public:
    explicit RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> tags = {});

    std::mt19937_64& engine() { return engine_; }

    double uniform();                  // [0, 1)
    int uniform_int(int lo, int hi);   // inclusive bounds
    double normal();                   // N(0, 1)
    /// Circular complex Gaussian CN(0, variance).
    std::complex<double> complex_normal(double variance);

private:
    std::mt19937_64 engine_;
};

} // namespace bdcs

#pragma once

#include <cstdint>
#include <random>

namespace liebridge {

/// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the index-th independent substream of a master seed. Depends only on
/// (master, index), so paths can be generated in any order on any worker.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

/// Standard normal draws from one substream.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace liebridge

#pragma once

#include <cstdint>
#include <random>

namespace esvm {

/// Identifies one independent random stream: (master seed, stream index).
struct SeedKey {
    std::uint64_t master = 0;
    std::uint32_t stream = 0;

    friend bool operator==(const SeedKey&, const SeedKey&) = default;
};

/// Deterministic generator for one stream. Normals come from std::normal_distribution
/// over a mt19937_64 engine whose state is a pure function of the SeedKey.
class Rng {
public:
    explicit Rng(SeedKey key);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// splitmix64 finalizer; used to decorrelate (master, stream) pairs.
std::uint64_t mix64(std::uint64_t x);

}  // namespace esvm

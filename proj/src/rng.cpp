#include "esvm/rng.hpp"

namespace esvm {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(SeedKey key) {
    const std::uint64_t a = mix64(key.master);
    const std::uint64_t b = mix64(a ^ mix64(0x5eedULL + key.stream));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), key.stream};
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(SeedKey key) : engine_(make_engine(key)) {}

}  // namespace esvm

#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "himae/tensor.hpp"

namespace himae {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a base seed and a tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// mt19937_64 state as text, stable across runs of one build.
inline std::string rng_state_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

inline void rng_set_state(Rng& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng;
}

inline real_t uniform_real(Rng& rng, real_t lo, real_t hi) {
    std::uniform_real_distribution<real_t> d(lo, hi);
    return d(rng);
}

inline real_t normal(Rng& rng, real_t mean = 0.0, real_t sd = 1.0) {
    std::normal_distribution<real_t> d(mean, sd);
    return d(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive range
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng);
}

}  // namespace himae

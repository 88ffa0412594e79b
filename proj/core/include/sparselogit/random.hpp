#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace sparselogit {

using Rng = std::mt19937_64;

// Generator for one named stream of a seeded computation. Every stream is
// keyed by (seed, path...), so adding replications or draws never perturbs
// the streams that already existed.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (path.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (std::uint64_t v : path) push(v);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

// Draws a seed for a nested computation from a parent stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    Rng rng = derive_rng(seed, path);
    return rng();
}

}  // namespace sparselogit

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace hhrl {

// All stochastic decisions draw from this engine. The helpers below avoid the
// standard distributions, whose output is implementation-defined, so that logs
// stay byte-identical across standard library builds.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform real in [0, 1) with 53 bits of precision.
double uniform_unit(Rng& rng);

// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

std::string save_rng_state(const Rng& rng);
Rng restore_rng_state(const std::string& state);

}  // namespace hhrl

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fldiag/matrix.hpp"

namespace fldiag {

/// Deterministic xoshiro256++ stream. The algorithm name and the seed are
/// recorded in run metadata; identical seeds reproduce identical draw
/// sequences across runs. State is seeded from the 64-bit seed via splitmix64.
class Rng {
public:
    static constexpr std::string_view algorithm = "xoshiro256++";

    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller (two uniforms per pair, second value
    /// cached), avoiding the implementation-defined std::normal_distribution.
    double normal();

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t bounded(std::uint64_t bound);

    /// Independent child stream derived from (seed, tag); does not consume
    /// draws from this stream.
    Rng child(std::uint64_t tag) const;
    Rng child(std::string_view tag) const;

    /// Uniformly random permutation of {0..n-1} (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& x);

/// FNV-1a over a byte string; used for tag hashing and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Matrix with i.i.d. N(0, std^2) entries, filled row-major from `rng`.
/// std == 0 produces an exact zero matrix.
Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double std_dev);

/// Matrix with i.i.d. entries uniform on {-1, +1}.
Matrix rademacher(Rng& rng, std::size_t rows, std::size_t cols);

} // namespace fldiag

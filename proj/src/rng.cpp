// SPDX-License-Identifier: Apache-2.0
#include "fldiag/rng.hpp"

#include <cmath>

namespace fldiag {

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
constexpr double kPi = 3.14159265358979323846;
} // namespace

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_normal_ = r * std::sin(2.0 * kPi * u2);
    has_cached_normal_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

std::uint64_t Rng::bounded(std::uint64_t bound) {
    // Rejection sampling on the top range keeps the draw unbiased.
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

Rng Rng::child(std::uint64_t tag) const {
    std::uint64_t x = seed_ ^ (tag * 0x9E3779B97F4A7C15ull);
    return Rng(splitmix64(x));
}

Rng Rng::child(std::string_view tag) const {
    return child(fnv1a64(tag));
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double std_dev) {
    check(std_dev >= 0.0, "gaussian: std must be >= 0");
    Matrix m(rows, cols);
    if (std_dev == 0.0) return m;
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = std_dev * rng.normal();
    return m;
}

Matrix rademacher(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    return m;
}

} // namespace fldiag

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace afos {

// splitmix64 output mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// A splitmix64 stream with a lineage label. Child streams are derived from
// (seed, label) only, never from the parent's draw position, so a role's
// stream does not depend on how many numbers other roles consumed.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed, std::string label = "root")
        : seed_(seed), state_(seed), label_(std::move(label)) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do r = next();
        while (r >= limit);
        return r % n;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Standard normal via Box-Muller; one draw per call.
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    SeededStream child(std::string_view label) const {
        std::string full = label_ + "/" + std::string(label);
        return SeededStream(mix64(seed_ ^ mix64(fnv1a(full))), std::move(full));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t state() const noexcept { return state_; }
    const std::string& label() const noexcept { return label_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    std::string label_;
};

}  // namespace afos

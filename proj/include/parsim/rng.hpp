#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace parsim {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-module random stream. The state is derived purely from
// (global seed, owner path), so a module draws the same sequence no matter
// which LP it lands on or in which order modules were constructed.
class RngStream {
public:
    RngStream() = default;

    static RngStream derive(std::uint64_t global_seed, const std::string& owner_path) {
        // FNV-1a over the path, folded with the seed through two splitmix
        // rounds; the golden-ratio increment keeps distinct paths apart.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : owner_path) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        RngStream s;
        s.state_ = splitmix64_mix(splitmix64_mix(global_seed + 0x9e3779b97f4a7c15ULL) ^ h);
        return s;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

    // Top 53 bits; uniform on [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double exponential(double mean) {
        if (!(mean > 0)) throw std::invalid_argument("exponential mean must be > 0");
        return -mean * std::log1p(-uniform01());
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below(0)");
        // Rejection to avoid modulo bias.
        std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

private:
    std::uint64_t state_ = 0;
};

}  // namespace parsim

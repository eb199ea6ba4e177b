#pragma once

#include <cstdint>
#include <random>

namespace acam {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// One independent randomness stream: (root seed, stream index) fully
/// determines the sequence, so parallel sweeps stay reproducible.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : eng_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701))) {}

    double normal(double mu, double sigma) {
        if (sigma <= 0.0) return mu;
        std::normal_distribution<double> d(mu, sigma);
        return d(eng_);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace acam

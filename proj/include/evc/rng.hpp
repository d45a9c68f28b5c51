#pragma once

#include <cstdint>

namespace evc {

// Counter-based stream: every draw is a hash of (key, counter), so streams
// can be split hierarchically and consumed in any order without coupling.
// The mixer is the splitmix64 finalizer.

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derived keys are themselves well-mixed; chaining derive_key builds a tree
// of independent streams (seed -> theta -> cell -> replicate -> pair).
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) {
    return mix64((key ^ 0x9E3779B97F4A7C15ull) + 0xD1B54A32D192ED03ull * (index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        return mix64(key_ + 0x9E3779B97F4A7C15ull * ++ctr_);
    }

    // Strictly inside (0,1): the offset keeps 0 and 1 unreachable, so logs
    // and powers downstream never hit a boundary.
    double u01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace evc

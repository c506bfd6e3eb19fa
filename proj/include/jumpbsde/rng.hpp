#pragma once

#include <cmath>
#include <cstdint>

namespace jumpbsde {

// Substream labels. Event skeletons draw from streams independent of the
// Brownian stream so that grid refinement never perturbs jump times.
enum class Stream : std::uint64_t {
    brownian = 1,
    event_times = 2,
    marks = 3,
    thinning = 4,
    scratch = 5,
};

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

// Counter-based generator: output i is a pure function of (key, i), with the
// key derived from (master_seed, path_index, stream). Draws are therefore
// reproducible independently of scheduling or thread count.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t path_index, Stream stream)
        : key_(derive_key(master_seed, path_index, static_cast<std::uint64_t>(stream))) {}

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ull;
        return detail::mix64(key_ + counter_);
    }

    // Uniform in (0, 1]; never 0, so log() is safe.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

private:
    static std::uint64_t derive_key(std::uint64_t master, std::uint64_t path, std::uint64_t stream) {
        std::uint64_t k = detail::mix64(master ^ 0x243F6A8885A308D3ull);
        k = detail::mix64(k ^ (path * 0x452821E638D01377ull + 0x13198A2E03707344ull));
        k = detail::mix64(k ^ (stream * 0xA4093822299F31D0ull + 0x082EFA98EC4E6C89ull));
        return k;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace jumpbsde

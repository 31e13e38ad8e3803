#pragma once

#include <cstdint>

namespace ptdisc {

// Counter-based pseudo-random stream: draw k of stream (seed, id) is a
// pure function of (seed, id, k). Trials can therefore be distributed
// over any number of workers and still reproduce bit-identical results,
// as long as each trial gets its own stream id.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : base_(mix(seed) ^ mix(stream_id + 0x9E3779B97F4A7C15ull)), counter_(0) {}

    static RngStream for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
        return RngStream(master_seed, trial_index);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(base_ + 0x9E3779B97F4A7C15ull * counter_);
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    // splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace ptdisc

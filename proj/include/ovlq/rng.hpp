#ifndef OVLQ_RNG_HPP
#define OVLQ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace ovlq {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Counter-based generator: output i of stream k is mix64(key_k + i * golden),
// the splitmix64 sequence keyed per stream. Streams are derived from a master
// seed by a fixed splitting rule, so replication i always sees the same
// sequence no matter how replications are scheduled across workers.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    // Stream `index` of a master seed: key = mix64(master ^ mix64(index + golden)).
    static CounterRng stream(std::uint64_t master_seed, std::uint64_t index) {
        return CounterRng(mix64(master_seed ^ mix64(index + kGolden)));
    }

    result_type operator()() {
        counter_ += kGolden;
        return mix64(key_ + counter_);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    // Exp(rate)
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace ovlq

#endif

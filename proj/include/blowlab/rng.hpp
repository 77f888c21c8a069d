#pragma once

#include <cmath>
#include <cstdint>

namespace blowlab {

// Identifies one reproducible random stream: the draws are a pure function
// of (master_seed, path_index, stream), independent of execution order.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based generator: output k of a stream keyed by (master_seed,
// path_index, stream) is mix64 applied to key + k * odd constant. Streams
// with distinct keys are independent for all practical purposes and any
// output can be computed without generating its predecessors.
class CounterRng {
public:
    explicit CounterRng(SeedSpec seed, std::uint64_t stream = 0)
        : key_(derive_key(seed, stream)) {}

    std::uint64_t next_u64() {
        return detail::mix64(key_ + counter_++ * 0xd1342543de82ef95ULL);
    }

    // Uniform in (0,1]; never 0, so logs are safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; one spare value cached per pair.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t derive_key(SeedSpec seed, std::uint64_t stream) {
        std::uint64_t k = detail::mix64(seed.master_seed);
        k = detail::mix64(k ^ detail::mix64(seed.path_index + 0x632be59bd9b4e019ULL));
        return detail::mix64(k ^ detail::mix64(stream + 0x9e6c63d0876a9a47ULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace blowlab

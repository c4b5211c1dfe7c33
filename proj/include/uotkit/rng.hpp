#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace uotkit {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over bytes; used to derive per-name streams.
std::uint64_t fnv1a64(std::string_view text);

/// Splittable counter-based generator.
///
/// Draw n of a stream with key k is splitmix64(k + (n + 1) * golden), so the
/// output depends only on (key, counter) and is identical on every platform.
/// `split` derives an independent child stream, which is how every random
/// consumer in the toolkit gets its own sequence from the single user seed.
/// Distributions are implemented here rather than taken from <random>,
/// whose distribution algorithms are implementation-defined.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    CounterRng split(std::uint64_t stream) const;
    CounterRng split(std::string_view name) const { return split(fnv1a64(name)); }

    /// k distinct values from [0, n) in ascending order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    struct RawKey {};
    CounterRng(std::uint64_t key, RawKey) : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace uotkit

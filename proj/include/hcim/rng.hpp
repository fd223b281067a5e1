#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace hcim {

/// Counter-based Philox4x64-10 generator.
///
/// State is a (key, counter) pair, so independent substreams are cheap:
/// every (seed, stream) pair yields a statistically independent sequence,
/// which lets Monte Carlo runs draw from private streams and stay
/// bit-reproducible regardless of thread scheduling.
class Philox4x64 {
public:
    using result_type = std::uint64_t;

    explicit Philox4x64(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{seed, stream} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        if (pos_ == 4) {
            advance_counter();
            block_ = generate_block();
            pos_ = 0;
        }
        return block_[pos_++];
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                        std::uint64_t& lo) {
        const unsigned __int128 p =
            static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    std::array<std::uint64_t, 4> generate_block() const {
        std::array<std::uint64_t, 4> c = counter_;
        std::array<std::uint64_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, c[0], hi0, lo0);
            mulhilo(kMul1, c[2], hi1, lo1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        return c;
    }

    void advance_counter() {
        for (int i = 0; i < 4; ++i) {
            if (++counter_[i] != 0) break;
        }
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
};

/// Uniform double in [0, 1) with the full 53-bit mantissa.
/// Hand-rolled (instead of std::uniform_real_distribution) so that streams
/// are bit-identical across standard library implementations.
template <class G>
double uniform01(G& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Unbiased via rejection sampling.
template <class G>
std::uint64_t uniform_below(G& g, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    for (;;) {
        const std::uint64_t x = g();
        if (x <= limit) return x % n;
    }
}

template <class G>
bool bernoulli(G& g, double p) {
    return uniform01(g) < p;
}

/// Number of successes before the first failure when each trial succeeds
/// with probability q: P(X = k) = (1 - q) q^k, mean q / (1 - q).
template <class G>
std::int64_t geometric_count(G& g, double q) {
    if (q <= 0.0) return 0;
    if (q >= 1.0) return std::numeric_limits<std::int64_t>::max();
    const double u = 1.0 - uniform01(g); // in (0, 1]
    return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(q)));
}

} // namespace hcim

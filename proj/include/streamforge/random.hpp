#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace streamforge {

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Finalizer from SplitMix64. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Counter-based per-component random stream.
///
/// Draw n of stream (seed, id) is mix64(base + (n+1)*golden) with
/// base = mix64(seed ^ fnv1a(id)): the same (seed, stream id, draw index)
/// always yields the same value, on every platform, regardless of how other
/// streams interleave their draws.
class RandomSource {
  public:
    RandomSource() : base_(0), index_(0) {}

    RandomSource(std::uint64_t seed, std::string_view stream_id)
        : base_(detail::mix64(detail::mix64(seed + detail::kGolden) ^ detail::fnv1a(stream_id))),
          index_(0) {}

    std::uint64_t next_u64() {
        ++index_;
        return detail::mix64(base_ + index_ * detail::kGolden);
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) {
            next_u64();  // burn a draw so stream positions stay aligned
            return false;
        }
        if (p >= 1.0) {
            next_u64();
            return true;
        }
        return next_double() < p;
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        // Multiply-shift bounded draw; bias is < 2^-64 per draw, irrelevant
        // at simulation scales, and keeps exactly one draw per call.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    std::uint64_t draws() const { return index_; }

  private:
    std::uint64_t base_;
    std::uint64_t index_;
};

}  // namespace streamforge

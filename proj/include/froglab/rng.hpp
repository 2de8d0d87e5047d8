#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace froglab {

/// SplitMix64 finalizer. Used both for seed derivation and for hashing
/// stream paths; the constants are the published ones.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// xoshiro256** engine without address bookkeeping. Used directly in hot
/// loops (one per frog, one per walk); obtain one with `RngStream::leaf`.
class LeafStream {
public:
    LeafStream() = default;
    explicit LeafStream(std::uint64_t key) noexcept;

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

/// A deterministic random stream addressed by (root seed, stream path).
///
/// Streams are values: copying one copies its position, and a child stream
/// depends only on the parent's address, never on how many draws the parent
/// has made. Two streams with the same address produce the same sequence.
///
/// The generator behind the address is xoshiro256**.
class RngStream {
public:
    explicit RngStream(std::uint64_t root_seed = 0);

    /// Stream at path `this.path ++ [id]`, independent of draws made so far.
    [[nodiscard]] RngStream child(std::uint64_t id) const;
    [[nodiscard]] RngStream child(std::initializer_list<std::uint64_t> ids) const;
    [[nodiscard]] RngStream child(std::span<const std::int64_t> ids) const;

    [[nodiscard]] std::uint64_t root_seed() const noexcept { return root_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    /// Engine for the child address `path ++ [id]` without materializing
    /// the child's path. Same sequence as `child(id)`.
    [[nodiscard]] LeafStream leaf(std::uint64_t id) const noexcept;

    std::uint64_t next_u64() noexcept { return engine_.next_u64(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return engine_.uniform(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift, unbiased).
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    RngStream(std::uint64_t root, std::vector<std::uint64_t> path, std::uint64_t key);

    std::uint64_t root_;
    std::uint64_t key_;  // hash of (root, path)
    std::vector<std::uint64_t> path_;
    LeafStream engine_;
};

/// Hash of an integer tuple into a stream id (order sensitive).
std::uint64_t hash_ids(std::span<const std::int64_t> ids) noexcept;

}  // namespace froglab

#include "froglab/rng.hpp"

namespace froglab {

namespace {

constexpr std::uint64_t kRootSalt = 0x6A09E667F3BCC909ULL;
constexpr std::uint64_t kChildSalt = 0xBB67AE8584CAA73BULL;

std::uint64_t mix_child(std::uint64_t parent_key, std::uint64_t id) noexcept {
    return splitmix64(parent_key ^ splitmix64(id + kChildSalt));
}

}  // namespace

LeafStream::LeafStream(std::uint64_t key) noexcept {
    std::uint64_t x = key;
    for (auto& word : s_) {
        x += 0x9E3779B97F4A7C15ULL;
        word = splitmix64(x);
    }
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

RngStream::RngStream(std::uint64_t root_seed)
    : root_(root_seed), key_(splitmix64(root_seed ^ kRootSalt)), engine_(key_) {}

RngStream::RngStream(std::uint64_t root, std::vector<std::uint64_t> path, std::uint64_t key)
    : root_(root), key_(key), path_(std::move(path)), engine_(key) {}

RngStream RngStream::child(std::uint64_t id) const {
    auto path = path_;
    path.push_back(id);
    return RngStream(root_, std::move(path), mix_child(key_, id));
}

RngStream RngStream::child(std::initializer_list<std::uint64_t> ids) const {
    auto path = path_;
    std::uint64_t key = key_;
    for (auto id : ids) {
        path.push_back(id);
        key = mix_child(key, id);
    }
    return RngStream(root_, std::move(path), key);
}

RngStream RngStream::child(std::span<const std::int64_t> ids) const {
    return child(hash_ids(ids));
}

LeafStream RngStream::leaf(std::uint64_t id) const noexcept {
    return LeafStream(mix_child(key_, id));
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<__uint128_t>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t hash_ids(std::span<const std::int64_t> ids) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ ids.size();
    for (auto v : ids) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return h;
}

}  // namespace froglab

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcd {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);

/// 32-byte master secret. Never written to any output.
class MasterKey {
public:
    static constexpr std::size_t size = 32;

    MasterKey() = default;
    static MasterKey from_bytes(std::span<const std::uint8_t> bytes);
    static MasterKey from_hex(std::string_view hex);

    std::span<const std::uint8_t, size> bytes() const noexcept { return bytes_; }
    MasterKey with_bit_flipped(std::size_t bit) const;

    friend bool operator==(const MasterKey&, const MasterKey&) = default;

private:
    std::array<std::uint8_t, size> bytes_{};
};

/// 16-byte public nonce, stored in clear in container headers.
class Nonce {
public:
    static constexpr std::size_t size = 16;

    Nonce() = default;
    static Nonce from_bytes(std::span<const std::uint8_t> bytes);
    static Nonce from_hex(std::string_view hex);

    std::span<const std::uint8_t, size> bytes() const noexcept { return bytes_; }
    std::string hex() const;
    Nonce with_bit_flipped(std::size_t bit) const;

    friend bool operator==(const Nonce&, const Nonce&) = default;

private:
    std::array<std::uint8_t, size> bytes_{};
};

struct SubKeys {
    Digest graph;
    Digest params;
    Digest init;
    Digest noise;
};

/// Each subkey is SHA-256(label || key || nonce) with the ASCII labels
/// "graph", "params", "init", "noise"; no separators or length prefixes.
SubKeys derive_subkeys(const MasterKey& key, const Nonce& nonce);
SubKeys derive_subkeys(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce);

/// SHA-256 counter-mode byte stream: block i is SHA-256(subkey || LE64(i)).
///
/// Output is a pure function of (subkey, bytes consumed). Single owner;
/// movable across threads but not shareable without synchronization.
class KeyedStream {
public:
    explicit KeyedStream(const Digest& subkey) noexcept : subkey_(subkey) {}

    void fill(std::span<std::uint8_t> out);
    std::uint64_t next_u64();

    /// (next_u64() >> 11) * 2^-53, in [0, 1).
    double unit_uniform() { return unit_from_u64(next_u64()); }

    /// a + (b - a) * unit_uniform(), kept strictly below b.
    double uniform(double a, double b);

    /// Unbiased draw in [0, m) by rejection over the largest multiple of m below 2^64.
    std::uint64_t index(std::uint64_t m);

    std::uint64_t bytes_consumed() const noexcept { return consumed_; }

    /// Reposition at the start of block `block`; the pending buffer is dropped.
    void seek_block(std::uint64_t block) noexcept;

    static constexpr double unit_from_u64(std::uint64_t u) noexcept {
        return static_cast<double>(u >> 11) * 0x1.0p-53;
    }

private:
    void refill();

    Digest subkey_;
    Digest block_{};
    std::uint64_t counter_ = 0;
    std::size_t offset_ = block_.size();
    std::uint64_t consumed_ = 0;
    bool exhausted_ = false;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

}  // namespace kcd

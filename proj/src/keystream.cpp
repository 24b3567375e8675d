#include "kcd/keystream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>

#include <openssl/evp.h>

#include "kcd/error.hpp"

namespace kcd {

namespace {

constexpr std::string_view kLabels[4] = {"graph", "params", "init", "noise"};

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            EVP_MD_CTX_free(ctx_);
            throw std::runtime_error("sha256: EVP init failed");
        }
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> data) {
        EVP_DigestUpdate(ctx_, data.data(), data.size());
        return *this;
    }

    Digest finish() {
        Digest out{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, out.data(), &len);
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

std::span<const std::uint8_t> as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    return Sha256().update(data).finish();
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw Error(Errc::InvalidInput, "hex string has odd length");
    }
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw Error(Errc::InvalidInput, "invalid hex digit");
        }
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

MasterKey MasterKey::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != size) {
        throw Error(Errc::InvalidKeyMaterial,
                    "key must be 32 bytes, got " + std::to_string(bytes.size()));
    }
    MasterKey k;
    std::copy(bytes.begin(), bytes.end(), k.bytes_.begin());
    return k;
}

MasterKey MasterKey::from_hex(std::string_view hex) {
    std::vector<std::uint8_t> raw;
    try {
        raw = kcd::from_hex(hex);
    } catch (const Error& e) {
        throw Error(Errc::InvalidKeyMaterial, "key hex: " + std::string(e.what()));
    }
    return from_bytes(raw);
}

MasterKey MasterKey::with_bit_flipped(std::size_t bit) const {
    MasterKey k = *this;
    k.bytes_.at(bit / 8) ^= static_cast<std::uint8_t>(1u << (bit % 8));
    return k;
}

Nonce Nonce::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != size) {
        throw Error(Errc::InvalidKeyMaterial,
                    "nonce must be 16 bytes, got " + std::to_string(bytes.size()));
    }
    Nonce n;
    std::copy(bytes.begin(), bytes.end(), n.bytes_.begin());
    return n;
}

Nonce Nonce::from_hex(std::string_view hex) {
    std::vector<std::uint8_t> raw;
    try {
        raw = kcd::from_hex(hex);
    } catch (const Error& e) {
        throw Error(Errc::InvalidKeyMaterial, "nonce hex: " + std::string(e.what()));
    }
    return from_bytes(raw);
}

std::string Nonce::hex() const { return to_hex(bytes_); }

Nonce Nonce::with_bit_flipped(std::size_t bit) const {
    Nonce n = *this;
    n.bytes_.at(bit / 8) ^= static_cast<std::uint8_t>(1u << (bit % 8));
    return n;
}

SubKeys derive_subkeys(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce) {
    return derive_subkeys(MasterKey::from_bytes(key), Nonce::from_bytes(nonce));
}

SubKeys derive_subkeys(const MasterKey& key, const Nonce& nonce) {
    Digest out[4];
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = Sha256().update(as_bytes(kLabels[i])).update(key.bytes()).update(nonce.bytes()).finish();
    }
    return SubKeys{out[0], out[1], out[2], out[3]};
}

void KeyedStream::refill() {
    if (exhausted_) {
        throw Error(Errc::StreamExhausted, "keyed stream passed 2^64 blocks");
    }
    std::array<std::uint8_t, 8> ctr{};
    for (std::size_t i = 0; i < 8; ++i) {
        ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    }
    block_ = Sha256().update(subkey_).update(ctr).finish();
    offset_ = 0;
    if (counter_ == std::numeric_limits<std::uint64_t>::max()) {
        exhausted_ = true;
    } else {
        ++counter_;
    }
}

void KeyedStream::seek_block(std::uint64_t block) noexcept {
    counter_ = block;
    offset_ = block_.size();
    exhausted_ = false;
}

void KeyedStream::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (offset_ == block_.size()) refill();
        const std::size_t n = std::min(out.size() - done, block_.size() - offset_);
        std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(offset_), n,
                    out.begin() + static_cast<std::ptrdiff_t>(done));
        offset_ += n;
        done += n;
        consumed_ += n;
    }
}

std::uint64_t KeyedStream::next_u64() {
    std::array<std::uint8_t, 8> raw{};
    fill(raw);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(raw[i]) << (8 * i);
    }
    return v;
}

double KeyedStream::uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b) || !std::isfinite(b - a)) {
        throw Error(Errc::InvalidRange, "uniform bounds must be finite with a < b");
    }
    const double v = a + (b - a) * unit_uniform();
    return v < b ? v : std::nextafter(b, a);
}

std::uint64_t KeyedStream::index(std::uint64_t m) {
    if (m == 0) {
        throw Error(Errc::InvalidRange, "index bound must be positive");
    }
    // 2^64 mod m; draws at or above 2^64 - rem are rejected.
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % m + 1) % m;
    for (;;) {
        const std::uint64_t u = next_u64();
        if (rem == 0 || u < std::uint64_t{0} - rem) {
            return u % m;
        }
    }
}

}  // namespace kcd

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kcd/dynamics.hpp"
#include "kcd/graph.hpp"
#include "kcd/keystream.hpp"
#include "kcd/matrix.hpp"

namespace kcd {

/// Values the caller fixes instead of letting the params stream draw them.
struct PinnedParams {
    std::optional<double> r;
    std::optional<double> mu;
    std::optional<double> s;
    std::optional<double> kick;
    std::optional<double> p;
    std::optional<std::uint32_t> k;
    std::optional<double> beta;
    std::optional<double> eps_c;

    friend bool operator==(const PinnedParams&, const PinnedParams&) = default;
};

struct CipherOptions {
    std::optional<MapKind> map;             // nullopt: key-selected
    std::optional<GraphFamily> family;      // nullopt: key-selected
    PinnedParams pins;
    std::uint32_t t_burn = 100;
    double noise_sigma = 1e-3;
    double alpha = 1.0;
    bool verify_chaos = false;

    /// Throws InvalidOptions / InvalidGraphSpec for out-of-range pins or amplitudes.
    void validate() const;

    /// Fields that affect the mask; verify_chaos is excluded.
    friend bool operator==(const CipherOptions& a, const CipherOptions& b) {
        return a.map == b.map && a.family == b.family && a.pins == b.pins && a.t_burn == b.t_burn &&
               a.noise_sigma == b.noise_sigma && a.alpha == b.alpha;
    }
};

/// Parameter ranges the params stream samples from when nothing is pinned.
inline constexpr ParamRange kErProbability{0.05, 0.3};
inline constexpr ParamRange kWsRewire{0.1, 0.5};
inline constexpr ParamRange kCouplingStrength{0.05, 0.3};
inline constexpr std::array<std::uint32_t, 3> kWsDegrees{2, 4, 6};

struct ResolvedSystem {
    SystemConfig config;
    Adjacency adjacency;
    WeightMatrix weights;
    Matrix x0;
    Digest noise_subkey;
};

/// Derives subkeys and draws, from the params stream in this order: map
/// index (if auto), the active map's parameter, family (if auto), family
/// parameters, eps_c. The graph stream then samples A and W, the init stream x0.
ResolvedSystem resolve_config(const MasterKey& key, const Nonce& nonce, std::size_t d,
                              const CipherOptions& options);

/// Row-major tensor of binary64 values with arbitrary rank.
struct Tensor {
    std::vector<std::uint64_t> shape;
    std::vector<double> values;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Number of elements implied by `shape`; throws InvalidShape on overflow.
std::uint64_t element_count(std::span<const std::uint64_t> shape);

/// n x d mask: d is the last axis, n the product of the leading axes.
Matrix generate_mask(const MasterKey& key, const Nonce& nonce, std::span<const std::uint64_t> shape,
                     const CipherOptions& options);

Tensor encrypt(const Tensor& x, const MasterKey& key, const Nonce& nonce, const CipherOptions& options);
Tensor decrypt(const Tensor& xt, const MasterKey& key, const Nonce& nonce, const CipherOptions& options);

using Fingerprint = std::array<std::uint8_t, 8>;

/// First 8 bytes of SHA-256 over the serialized options block.
Fingerprint config_fingerprint(const CipherOptions& options);

struct MaskedContainer {
    Nonce nonce;
    Fingerprint fingerprint{};
    CipherOptions options;
    Tensor tensor;
};

MaskedContainer seal(const Tensor& x, const MasterKey& key, const Nonce& nonce, const CipherOptions& options);

/// Throws ConfigMismatch if the stored fingerprint does not match the options block.
Tensor unseal(const MaskedContainer& container, const MasterKey& key);

}  // namespace kcd

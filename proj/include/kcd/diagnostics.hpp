#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kcd/cipher.hpp"
#include "kcd/dynamics.hpp"

namespace kcd {

struct LyapunovOptions {
    double epsilon = 1e-8;
    /// Leading logs left out of lambda_hat (still counted in lambda_all).
    std::size_t discard = 10;
};

struct LyapunovReport {
    double lambda_hat = 0.0;   // mean of per_step_logs, nats/step
    double lambda_all = 0.0;   // mean over all `steps` logs
    std::size_t steps = 0;
    double epsilon = 0.0;
    std::size_t discarded = 0;
    std::vector<double> per_step_logs;
    bool synchronized = false; // separation collapsed to zero; lambda_hat is -inf
};

/// Two-trajectory estimate of the largest Lyapunov exponent with noise off.
///
/// The perturbed copy starts at x0 + epsilon on every component. One
/// unlogged step renormalizes the separation to exactly epsilon; after that
/// each of the `steps` iterations records log(|delta| / epsilon) and resets
/// x_hat = x + epsilon * delta / (|delta| + 1e-30). delta is measured on the
/// torus (minimal image) and x_hat is folded back into the domain.
LyapunovReport estimate_lyapunov(const SystemConfig& cfg, const WeightMatrix& w, const Matrix& x0,
                                 std::size_t steps, const LyapunovOptions& options = {});

struct AvalancheReport {
    double pearson_r = 0.0;
    double mean_abs_diff = 0.0;
    std::size_t elements = 0;
};

/// Pearson correlation; 0 when either side has zero variance, 1 if both are identical.
double pearson(std::span<const double> a, std::span<const double> b);

/// Generates the masks for (key_a, nonce_a) and (key_b, nonce_b) at shape
/// rows x cols and compares them. Identical inputs throw IdenticalInputs
/// unless `allow_identical` is set.
AvalancheReport avalanche(const MasterKey& key_a, const Nonce& nonce_a, const MasterKey& key_b,
                          const Nonce& nonce_b, std::size_t rows, std::size_t cols,
                          const CipherOptions& options, bool allow_identical = false);

}  // namespace kcd

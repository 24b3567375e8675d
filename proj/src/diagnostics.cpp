#include "kcd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kcd/error.hpp"

namespace kcd {

namespace {

constexpr double kNormGuard = 1e-30;

// Separation x_hat - x on the torus; returns its Euclidean norm.
double separation(MapKind kind, const Matrix& x, const Matrix& x_hat, Matrix& delta) {
    double sq = 0.0;
    const auto a = x.values();
    const auto b = x_hat.values();
    const auto out = delta.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = wrapped_difference(kind, b[i], a[i]);
        sq += out[i] * out[i];
    }
    return std::sqrt(sq);
}

void renormalize(MapKind kind, const Matrix& x, const Matrix& delta, double norm, double epsilon, Matrix& x_hat) {
    const double scale = epsilon / (norm + kNormGuard);
    const auto a = x.values();
    const auto dv = delta.values();
    const auto out = x_hat.values();
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fold(kind, a[i] + scale * dv[i]);
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

LyapunovReport estimate_lyapunov(const SystemConfig& cfg, const WeightMatrix& w, const Matrix& x0,
                                 std::size_t steps, const LyapunovOptions& options) {
    if (steps == 0) throw Error(Errc::InvalidRange, "Lyapunov estimate needs at least one step");
    const double eps = options.epsilon;
    if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidRange, "perturbation must lie in (0, 1)");

    const MapKind kind = cfg.map;
    Matrix x = x0;
    Matrix x_hat = x0;
    for (double& v : x_hat.values()) v = fold(kind, v + eps);
    Matrix delta(x.rows(), x.cols());

    CoupledStepper base(kind, cfg.params, w);
    CoupledStepper perturbed(kind, cfg.params, w);

    LyapunovReport report;
    report.steps = steps;
    report.epsilon = eps;
    std::vector<double> logs;
    logs.reserve(steps);

    // Unlogged step: brings the all-components offset down to exactly eps.
    base.advance(x, nullptr, 0);
    perturbed.advance(x_hat, nullptr, 0);
    double norm = separation(kind, x, x_hat, delta);
    renormalize(kind, x, delta, norm, eps, x_hat);

    for (std::size_t t = 1; t <= steps; ++t) {
        base.advance(x, nullptr, t);
        perturbed.advance(x_hat, nullptr, t);
        norm = separation(kind, x, x_hat, delta);
        if (norm == 0.0) report.synchronized = true;
        logs.push_back(norm == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(norm / eps));
        renormalize(kind, x, delta, norm, eps, x_hat);
    }

    report.discarded = steps > options.discard ? options.discard : 0;
    report.lambda_all = mean(logs);
    report.per_step_logs.assign(logs.begin() + static_cast<std::ptrdiff_t>(report.discarded), logs.end());
    report.lambda_hat = mean(report.per_step_logs);
    if (report.synchronized) {
        report.lambda_hat = -std::numeric_limits<double>::infinity();
        report.lambda_all = report.lambda_hat;
    }
    return report;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(Errc::InvalidShape, "pearson needs two non-empty samples of equal length");
    }
    if (std::equal(a.begin(), a.end(), b.begin())) return 1.0;
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

AvalancheReport avalanche(const MasterKey& key_a, const Nonce& nonce_a, const MasterKey& key_b,
                          const Nonce& nonce_b, std::size_t rows, std::size_t cols,
                          const CipherOptions& options, bool allow_identical) {
    if (key_a == key_b && nonce_a == nonce_b && !allow_identical) {
        throw Error(Errc::IdenticalInputs, "avalanche needs differing keys or nonces");
    }
    const std::uint64_t shape[2] = {rows, cols};
    const Matrix sa = generate_mask(key_a, nonce_a, shape, options);
    const Matrix sb = generate_mask(key_b, nonce_b, shape, options);

    AvalancheReport report;
    report.elements = sa.size();
    report.pearson_r = pearson(sa.values(), sb.values());
    double diff = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) diff += std::fabs(sa.values()[i] - sb.values()[i]);
    report.mean_abs_diff = diff / static_cast<double>(sa.size());
    return report;
}

}  // namespace kcd

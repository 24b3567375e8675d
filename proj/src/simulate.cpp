#include <cmath>
#include <string>

#include "kcd/dynamics.hpp"
#include "kcd/error.hpp"

namespace kcd {

namespace {

constexpr double kInitLow = 0.05;
constexpr double kInitWidth = 0.9;

void check_shape(const Matrix& x, std::size_t d, MapKind kind, const char* what) {
    if (x.rows() != d || x.cols() != state_dim(kind)) {
        throw Error(Errc::InvalidDimension, std::string(what) + " must be " + std::to_string(d) + " x " +
                                                std::to_string(state_dim(kind)));
    }
}

}  // namespace

CoupledStepper::CoupledStepper(MapKind kind, const MapParams& params, const WeightMatrix& w)
    : kind_(kind),
      params_(params),
      w_(&w),
      mapped_(w.nodes(), state_dim(kind)),
      coupled_(w.nodes(), state_dim(kind)) {}

void CoupledStepper::advance(Matrix& x, const Matrix* noise, std::uint64_t step) {
    const std::size_t d = w_->nodes();
    const std::size_t m = state_dim(kind_);
    check_shape(x, d, kind_, "state");
    if (noise != nullptr) check_shape(*noise, d, kind_, "noise");

    for (std::size_t i = 0; i < d; ++i) {
        NodeState in{x(i, 0), m > 1 ? x(i, 1) : 0.0};
        const NodeState out = map_step(kind_, in, params_);
        for (std::size_t c = 0; c < m; ++c) mapped_(i, c) = out[c];
    }

    kernels::diffuse(w_->sparse(), mapped_, coupled_);

    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            double v = coupled_(i, c);
            if (noise != nullptr) v += (*noise)(i, c);
            if (!std::isfinite(v)) {
                throw Error(Errc::NumericalDivergence, "non-finite state at node " + std::to_string(i) +
                                                           ", component " + std::to_string(c) +
                                                           ", step " + std::to_string(step));
            }
            x(i, c) = fold(kind_, v);
        }
    }
}

Matrix coupled_step(const Matrix& x, const WeightMatrix& w, MapKind kind, const MapParams& params,
                    const Matrix& noise) {
    Matrix next = x;
    CoupledStepper(kind, params, w).advance(next, &noise);
    return next;
}

Matrix init_state(const SystemConfig& cfg, KeyedStream& init_stream) {
    const std::size_t m = state_dim(cfg.map);
    Matrix x(cfg.d, m);
    for (std::size_t i = 0; i < cfg.d; ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            x(i, c) = cfg.map == MapKind::Standard ? init_stream.uniform(0.0, kTwoPi)
                                                   : kInitLow + kInitWidth * init_stream.unit_uniform();
        }
    }
    return x;
}

Matrix simulate(const SystemConfig& cfg, const WeightMatrix& w, const Matrix& x0,
                KeyedStream& noise_stream, std::size_t rows) {
    if (rows == 0) throw Error(Errc::InvalidShape, "simulate needs at least one retained row");
    if (w.nodes() != cfg.d) throw Error(Errc::InvalidDimension, "weight matrix does not match d");
    if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
        throw Error(Errc::InvalidOptions, "noise sigma must be finite and non-negative");
    }
    if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
        throw Error(Errc::InvalidOptions, "alpha must be finite and positive");
    }

    const std::size_t m = state_dim(cfg.map);
    Matrix x = x0;
    Matrix noise(cfg.d, m);
    Matrix mask(rows, cfg.d);
    CoupledStepper stepper(cfg.map, cfg.params, w);
    const bool noisy = cfg.noise_sigma > 0.0;

    const std::uint64_t total = std::uint64_t{cfg.t_burn} + rows;
    for (std::uint64_t t = 0; t < total; ++t) {
        if (noisy) {
            for (double& v : noise.values()) v = noise_stream.uniform(-cfg.noise_sigma, cfg.noise_sigma);
        }
        stepper.advance(x, noisy ? &noise : nullptr, t);
        if (t >= cfg.t_burn) {
            auto out = mask.row(static_cast<std::size_t>(t - cfg.t_burn));
            for (std::size_t i = 0; i < cfg.d; ++i) out[i] = mask_value(cfg.map, x(i, 0), cfg.alpha);
        }
    }
    return mask;
}

}  // namespace kcd

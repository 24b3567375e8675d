#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>

#include "kcd/graph.hpp"
#include "kcd/keystream.hpp"
#include "kcd/matrix.hpp"

namespace kcd {

enum class MapKind : std::uint8_t { Logistic = 0, Tent = 1, Baker = 2, Standard = 3, ArnoldCat = 4 };

inline constexpr std::size_t kMapCount = 5;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string_view map_name(MapKind kind) noexcept;
std::optional<MapKind> parse_map(std::string_view name) noexcept;

/// Components per node: 1 for Logistic/Tent, 2 otherwise.
constexpr std::size_t state_dim(MapKind kind) noexcept {
    return kind == MapKind::Logistic || kind == MapKind::Tent ? 1 : 2;
}

/// Fold period: 2*pi for the standard map, 1 for everything else.
constexpr double domain_period(MapKind kind) noexcept {
    return kind == MapKind::Standard ? kTwoPi : 1.0;
}

struct MapParams {
    double r = 0.0;      // logistic rate
    double mu = 0.0;     // tent break point
    double s = 0.0;      // baker fold point
    double kick = 0.0;   // standard map K

    friend bool operator==(const MapParams&, const MapParams&) = default;
};

/// Parameter intervals that give bounded chaotic dynamics.
struct ParamRange {
    double lo;
    double hi;
};
inline constexpr ParamRange kLogisticRate{3.9, 4.0};
inline constexpr ParamRange kTentBreak{0.4, 0.6};
inline constexpr ParamRange kBakerFold{0.3, 0.7};
inline constexpr ParamRange kStandardKick{1.0, 5.0};
// Auto-drawn K stays in the band where coupled lattices are reliably mixing.
inline constexpr ParamRange kStandardKickDraw{2.5, 4.0};

/// Throws InvalidOptions if the active map's parameter is outside its range.
void validate_params(MapKind kind, const MapParams& params);

/// Full resolved system. States are d x state_dim(map).
struct SystemConfig {
    GraphSpec graph;
    MapKind map = MapKind::Logistic;
    MapParams params;
    std::size_t d = 0;
    std::uint32_t t_burn = 100;
    double noise_sigma = 1e-3;
    double alpha = 1.0;
};

using NodeState = std::array<double, 2>;

double fold_unit(double v) noexcept;
double fold_angle(double v) noexcept;
inline double fold(MapKind kind, double v) noexcept {
    return kind == MapKind::Standard ? fold_angle(v) : fold_unit(v);
}

/// Minimal-image difference a - b on the map's fold period.
double wrapped_difference(MapKind kind, double a, double b) noexcept;

bool in_domain(MapKind kind, double v) noexcept;

/// One application of the node-level map. Only the first state_dim(kind)
/// components are read or written. Throws DomainViolation on out-of-domain input.
NodeState map_step(MapKind kind, const NodeState& x, const MapParams& params);

namespace kernels {

/// out(i,c) = y(i,c) + sum_j W_ij (y(j,c) - y(i,c)), evaluated with exact
/// differences, FMA-split products and compensated accumulation so the result
/// is correctly rounded up to O(u^2). Neither noise nor folding is applied.
void diffuse(const SparseRows& w, const Matrix& y, Matrix& out);

/// Single-threaded reference for `diffuse`; bitwise-identical output.
void diffuse_serial(const SparseRows& w, const Matrix& y, Matrix& out);

}  // namespace kernels

/// Reusable buffers for repeated coupled steps.
class CoupledStepper {
public:
    CoupledStepper(MapKind kind, const MapParams& params, const WeightMatrix& w);

    /// x <- fold(diffuse(f_local(x)) + noise). `noise` may be null (all zero).
    /// `step` only labels NumericalDivergence errors.
    void advance(Matrix& x, const Matrix* noise, std::uint64_t step = 0);

private:
    MapKind kind_;
    MapParams params_;
    const WeightMatrix* w_;
    Matrix mapped_;
    Matrix coupled_;
};

/// Coupled update followed by noise injection and folding.
Matrix coupled_step(const Matrix& x, const WeightMatrix& w, MapKind kind, const MapParams& params,
                    const Matrix& noise);

/// Uniform start in the safe interior: [0.05, 0.95) per component for the
/// unit-domain maps, [0, 2*pi) for the standard map. Node-major, component-minor.
Matrix init_state(const SystemConfig& cfg, KeyedStream& init_stream);

/// Runs t_burn discarded steps then `rows` retained steps; each retained step
/// emits alpha * (2u - 1) for the normalized first component u of every node.
/// Noise is uniform in [-sigma, sigma), drawn step-major, node-major,
/// component-minor; no draws are made when sigma == 0.
Matrix simulate(const SystemConfig& cfg, const WeightMatrix& w, const Matrix& x0,
                KeyedStream& noise_stream, std::size_t rows);

/// Normalized mask value for a folded first component.
double mask_value(MapKind kind, double first_component, double alpha) noexcept;

}  // namespace kcd

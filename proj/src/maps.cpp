#include <cmath>
#include <string>

#include "kcd/dynamics.hpp"
#include "kcd/error.hpp"

namespace kcd {

namespace {

constexpr std::string_view kMapNames[kMapCount] = {"logistic", "tent", "baker", "standard", "cat"};

double fold_period(double v, double period) noexcept {
    double r = std::fmod(v, period);
    if (r < 0.0) r += period;
    if (r >= period) r = 0.0;
    if (r == 0.0) r = 0.0;  // drop the sign of -0.0
    return r;
}

}  // namespace

std::string_view map_name(MapKind kind) noexcept {
    return kMapNames[static_cast<std::size_t>(kind)];
}

std::optional<MapKind> parse_map(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kMapCount; ++i) {
        if (kMapNames[i] == name) return static_cast<MapKind>(i);
    }
    if (name == "arnold-cat" || name == "arnoldcat") return MapKind::ArnoldCat;
    return std::nullopt;
}

void validate_params(MapKind kind, const MapParams& params) {
    auto check = [](double v, ParamRange range, const char* what) {
        if (!(v >= range.lo && v <= range.hi)) {
            throw Error(Errc::InvalidOptions, std::string(what) + " outside [" + std::to_string(range.lo) +
                                                  ", " + std::to_string(range.hi) + "]");
        }
    };
    switch (kind) {
        case MapKind::Logistic: check(params.r, kLogisticRate, "logistic r"); break;
        case MapKind::Tent: check(params.mu, kTentBreak, "tent mu"); break;
        case MapKind::Baker: check(params.s, kBakerFold, "baker s"); break;
        case MapKind::Standard: check(params.kick, kStandardKick, "standard K"); break;
        case MapKind::ArnoldCat: break;
    }
}

double fold_unit(double v) noexcept { return fold_period(v, 1.0); }
double fold_angle(double v) noexcept { return fold_period(v, kTwoPi); }

double wrapped_difference(MapKind kind, double a, double b) noexcept {
    const double period = domain_period(kind);
    double diff = a - b;
    if (diff >= 0.5 * period) {
        diff -= period;
    } else if (diff < -0.5 * period) {
        diff += period;
    }
    return diff;
}

bool in_domain(MapKind kind, double v) noexcept {
    return v >= 0.0 && v < domain_period(kind);
}

NodeState map_step(MapKind kind, const NodeState& x, const MapParams& params) {
    for (std::size_t c = 0; c < state_dim(kind); ++c) {
        if (!in_domain(kind, x[c])) {
            throw Error(Errc::DomainViolation, std::string(map_name(kind)) + " state component " +
                                                   std::to_string(c) + " = " + std::to_string(x[c]) +
                                                   " outside the invariant domain");
        }
    }
    switch (kind) {
        case MapKind::Logistic:
            return {params.r * x[0] * (1.0 - x[0]), 0.0};
        case MapKind::Tent:
            return {x[0] < params.mu ? x[0] / params.mu : (1.0 - x[0]) / (1.0 - params.mu), 0.0};
        case MapKind::Baker:
            // Stretch x by 1/s or 1/(1-s), stack y into [0,s) or [s,1).
            if (x[0] < params.s) return {x[0] / params.s, params.s * x[1]};
            return {(x[0] - params.s) / (1.0 - params.s), (1.0 - params.s) * x[1] + params.s};
        case MapKind::Standard: {
            // State is (theta, p).
            const double p = fold_angle(x[1] + params.kick * std::sin(x[0]));
            return {fold_angle(x[0] + p), p};
        }
        case MapKind::ArnoldCat:
            return {fold_unit(x[0] + x[1]), fold_unit(x[0] + 2.0 * x[1])};
    }
    return x;
}

double mask_value(MapKind kind, double first_component, double alpha) noexcept {
    double u = first_component;
    if (kind == MapKind::Standard) {
        u = std::fmin(first_component / kTwoPi, 0x1.fffffffffffffp-1);
    }
    return alpha * (2.0 * u - 1.0);
}

}  // namespace kcd

#include "kcd/cipher.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kcd/diagnostics.hpp"
#include "kcd/error.hpp"
#include "kcd/tensorio.hpp"

namespace kcd {

namespace {

constexpr std::size_t kVerifySteps = 2000;
constexpr double kVerifyEpsilon = 1e-8;

double draw_or_pin(const std::optional<double>& pin, KeyedStream& stream, ParamRange range) {
    return pin ? *pin : stream.uniform(range.lo, range.hi);
}

void require(bool ok, Errc code, const char* what) {
    if (!ok) throw Error(code, what);
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidInput, std::string(what) + " contains non-finite values");
    }
}

}  // namespace

void CipherOptions::validate() const {
    auto in = [](const std::optional<double>& v, ParamRange range) {
        return !v || (*v >= range.lo && *v <= range.hi);
    };
    require(in(pins.r, kLogisticRate), Errc::InvalidOptions, "pinned r outside [3.9, 4.0]");
    require(in(pins.mu, kTentBreak), Errc::InvalidOptions, "pinned mu outside [0.4, 0.6]");
    require(in(pins.s, kBakerFold), Errc::InvalidOptions, "pinned s outside [0.3, 0.7]");
    require(in(pins.kick, kStandardKick), Errc::InvalidOptions, "pinned K outside [1, 5]");
    require(!pins.p || (*pins.p > 0.0 && *pins.p < 1.0), Errc::InvalidGraphSpec, "pinned p outside (0, 1)");
    require(!pins.k || (*pins.k >= 2 && *pins.k % 2 == 0), Errc::InvalidGraphSpec, "pinned k must be even and >= 2");
    require(!pins.beta || (*pins.beta >= 0.0 && *pins.beta <= 1.0), Errc::InvalidGraphSpec,
            "pinned beta outside [0, 1]");
    require(!pins.eps_c || (*pins.eps_c > 0.0 && *pins.eps_c < 1.0), Errc::InvalidGraphSpec,
            "pinned eps_c outside (0, 1)");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, Errc::InvalidOptions,
            "sigma must be finite and non-negative");
    require(std::isfinite(alpha) && alpha > 0.0, Errc::InvalidOptions, "alpha must be finite and positive");
    require(!map || static_cast<std::size_t>(*map) < kMapCount, Errc::InvalidOptions, "unknown map");
    require(!family || *family == GraphFamily::ErdosRenyi || *family == GraphFamily::WattsStrogatz,
            Errc::InvalidOptions, "unknown graph family");
}

ResolvedSystem resolve_config(const MasterKey& key, const Nonce& nonce, std::size_t d,
                              const CipherOptions& options) {
    options.validate();
    if (d == 0) throw Error(Errc::InvalidDimension, "tensor width must be at least 1");

    const SubKeys sub = derive_subkeys(key, nonce);
    KeyedStream params(sub.params);

    SystemConfig cfg;
    cfg.d = d;
    cfg.t_burn = options.t_burn;
    cfg.noise_sigma = options.noise_sigma;
    cfg.alpha = options.alpha;
    cfg.map = options.map ? *options.map : static_cast<MapKind>(params.index(kMapCount));

    const PinnedParams& pins = options.pins;
    switch (cfg.map) {
        case MapKind::Logistic: cfg.params.r = draw_or_pin(pins.r, params, kLogisticRate); break;
        case MapKind::Tent: cfg.params.mu = draw_or_pin(pins.mu, params, kTentBreak); break;
        case MapKind::Baker: cfg.params.s = draw_or_pin(pins.s, params, kBakerFold); break;
        case MapKind::Standard: cfg.params.kick = draw_or_pin(pins.kick, params, kStandardKickDraw); break;
        case MapKind::ArnoldCat: break;
    }

    GraphSpec& graph = cfg.graph;
    graph.d = d;
    if (options.family) {
        graph.family = *options.family;
    } else if (d < 3) {
        // No even 2 <= k < d exists, so only ER is possible.
        graph.family = GraphFamily::ErdosRenyi;
    } else {
        graph.family = static_cast<GraphFamily>(params.index(2));
    }

    if (graph.family == GraphFamily::ErdosRenyi) {
        graph.p = draw_or_pin(pins.p, params, kErProbability);
    } else {
        if (pins.k) {
            graph.k = *pins.k;
        } else {
            std::size_t choices = 0;
            while (choices < kWsDegrees.size() && kWsDegrees[choices] < d) ++choices;
            if (choices == 0) throw Error(Errc::InvalidGraphSpec, "WS needs d >= 3");
            graph.k = kWsDegrees[params.index(choices)];
        }
        graph.beta = draw_or_pin(pins.beta, params, kWsRewire);
    }
    graph.eps_c = draw_or_pin(pins.eps_c, params, kCouplingStrength);
    graph.validate();

    KeyedStream graph_stream(sub.graph);
    Adjacency adjacency = sample_graph(graph, graph_stream);
    WeightMatrix weights = sample_weights(adjacency, graph.eps_c, graph_stream);

    KeyedStream init_stream(sub.init);
    Matrix x0 = init_state(cfg, init_stream);

    if (options.verify_chaos) {
        const LyapunovReport report =
            estimate_lyapunov(cfg, weights, x0, kVerifySteps, LyapunovOptions{kVerifyEpsilon});
        if (!(report.lambda_hat > 0.0)) {
            throw ChaosVerificationError(report.lambda_hat, "largest Lyapunov exponent " +
                                                                std::to_string(report.lambda_hat) +
                                                                " is not positive");
        }
    }

    return ResolvedSystem{cfg, std::move(adjacency), std::move(weights), std::move(x0), sub.noise};
}

std::uint64_t element_count(std::span<const std::uint64_t> shape) {
    std::uint64_t n = 1;
    for (std::uint64_t dim : shape) {
        if (dim != 0 && n > std::numeric_limits<std::uint64_t>::max() / dim) {
            throw Error(Errc::InvalidShape, "tensor shape overflows 64 bits");
        }
        n *= dim;
    }
    return n;
}

Matrix generate_mask(const MasterKey& key, const Nonce& nonce, std::span<const std::uint64_t> shape,
                     const CipherOptions& options) {
    if (shape.empty() || element_count(shape) == 0) {
        throw Error(Errc::InvalidShape, "mask shape must have at least one element");
    }
    const std::uint64_t d = shape.back();
    if (d > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::InvalidShape, "last axis too wide");
    }
    const std::uint64_t n = element_count(shape.first(shape.size() - 1));

    const ResolvedSystem sys = resolve_config(key, nonce, static_cast<std::size_t>(d), options);
    KeyedStream noise(sys.noise_subkey);
    return simulate(sys.config, sys.weights, sys.x0, noise, static_cast<std::size_t>(n));
}

Tensor encrypt(const Tensor& x, const MasterKey& key, const Nonce& nonce, const CipherOptions& options) {
    if (x.values.size() != element_count(x.shape) || x.values.empty()) {
        throw Error(Errc::InvalidShape, "tensor values do not match its shape");
    }
    check_finite(x.values, "plain tensor");
    const Matrix mask = generate_mask(key, nonce, x.shape, options);
    Tensor out{x.shape, x.values};
    const auto s = mask.values();
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += s[i];
    return out;
}

Tensor decrypt(const Tensor& xt, const MasterKey& key, const Nonce& nonce, const CipherOptions& options) {
    if (xt.values.size() != element_count(xt.shape) || xt.values.empty()) {
        throw Error(Errc::InvalidShape, "tensor values do not match its shape");
    }
    check_finite(xt.values, "masked tensor");
    const Matrix mask = generate_mask(key, nonce, xt.shape, options);
    Tensor out{xt.shape, xt.values};
    const auto s = mask.values();
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= s[i];
    return out;
}

Fingerprint config_fingerprint(const CipherOptions& options) {
    const Digest digest = sha256(io::encode_options(options));
    Fingerprint fp{};
    std::copy_n(digest.begin(), fp.size(), fp.begin());
    return fp;
}

MaskedContainer seal(const Tensor& x, const MasterKey& key, const Nonce& nonce, const CipherOptions& options) {
    return MaskedContainer{nonce, config_fingerprint(options), options, encrypt(x, key, nonce, options)};
}

Tensor unseal(const MaskedContainer& container, const MasterKey& key) {
    if (config_fingerprint(container.options) != container.fingerprint) {
        throw Error(Errc::ConfigMismatch, "container fingerprint does not match its options block");
    }
    return decrypt(container.tensor, key, container.nonce, container.options);
}

}  // namespace kcd

// kcd: keyed chaotic tensor masking from the command line.
//
//   kcd encrypt  --key HEX64 (--nonce HEX32 | --gen-nonce) --in X --out C.kcdm [options] [--check]
//   kcd decrypt  --key HEX64 --in C.kcdm --out X
//   kcd mask     --key HEX64 --nonce HEX32 --shape 2,3 --out S.kten [options]
//   kcd diagnose --key HEX64 --nonce HEX32 --d N [options] [--steps T] [--csv logs.csv]
//   kcd inspect  --key HEX64 --nonce HEX32 --d N [options] [--adjacency-csv A.csv] [--weights-csv W.csv]
//   kcd inspect  --container C.kcdm
//   kcd demo     --key HEX64 --in X [--nonce HEX32] [--out Y]
//
// The KCD_KEY environment variable, when set, takes precedence over --key.
// Tensor paths ending in .csv are read/written as CSV, everything else as KTEN.
//
// Exit codes: 0 ok, 1 internal failure, 2 invalid arguments, 3 I/O or format
// error, 4 chaos verification failed, 5 container config mismatch,
// 6 diagnose found a non-positive Lyapunov exponent.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kcd/cipher.hpp"
#include "kcd/diagnostics.hpp"
#include "kcd/error.hpp"
#include "kcd/keystream.hpp"
#include "kcd/tensorio.hpp"

namespace {

using namespace kcd;

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kBadArgs = 2,
    kIo = 3,
    kChaos = 4,
    kMismatch = 5,
    kNotChaotic = 6,
};

int exit_code(Errc code) {
    switch (code) {
        case Errc::InvalidKeyMaterial:
        case Errc::InvalidRange:
        case Errc::InvalidDimension:
        case Errc::InvalidGraphSpec:
        case Errc::InvalidOptions:
        case Errc::InvalidShape:
        case Errc::InvalidInput:
        case Errc::IdenticalInputs:
            return kBadArgs;
        case Errc::IoError:
        case Errc::UnsupportedFormat:
        case Errc::CorruptFile:
        case Errc::UnsupportedVersion:
            return kIo;
        case Errc::ChaosVerificationFailed:
            return kChaos;
        case Errc::ConfigMismatch:
            return kMismatch;
        default:
            return kInternal;
    }
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flags shared by every command that resolves a system.
struct SystemFlags {
    std::string map = "auto";
    std::string graph = "auto";
    double r = 0, mu = 0, s = 0, kick = 0, p = 0, beta = 0, eps_c = 0;
    std::uint32_t k = 0;
    double alpha = 1.0;
    double sigma = 1e-3;
    std::uint32_t burn = 100;
    bool verify_chaos = false;

    std::vector<std::pair<CLI::Option*, std::optional<double>*>> pinned;
    CLI::Option* k_opt = nullptr;

    void attach(CLI::App& cmd) {
        cmd.add_option("--map", map, "logistic | tent | baker | standard | cat | auto")->capture_default_str();
        cmd.add_option("--graph", graph, "er | ws | auto")->capture_default_str();
        cmd.add_option("--r", r, "pin logistic rate");
        cmd.add_option("--mu", mu, "pin tent break point");
        cmd.add_option("--s", s, "pin baker fold point");
        cmd.add_option("--K", kick, "pin standard-map kick strength");
        cmd.add_option("--p", p, "pin ER edge probability");
        k_opt = cmd.add_option("--k", k, "pin WS lattice degree");
        cmd.add_option("--beta", beta, "pin WS rewiring probability");
        cmd.add_option("--eps-c", eps_c, "pin coupling strength");
        cmd.add_option("--alpha", alpha, "mask amplitude")->capture_default_str();
        cmd.add_option("--sigma", sigma, "noise amplitude")->capture_default_str();
        cmd.add_option("--burn", burn, "burn-in steps")->capture_default_str();
        cmd.add_flag("--verify-chaos", verify_chaos, "fail unless the resolved system has a positive Lyapunov exponent");
    }

    CipherOptions options(const CLI::App& cmd) const {
        CipherOptions o;
        if (map != "auto") {
            o.map = parse_map(map);
            if (!o.map) throw UsageError("unknown map '" + map + "'");
        }
        if (graph == "er") {
            o.family = GraphFamily::ErdosRenyi;
        } else if (graph == "ws") {
            o.family = GraphFamily::WattsStrogatz;
        } else if (graph != "auto") {
            throw UsageError("unknown graph family '" + graph + "'");
        }
        auto pin = [&](const char* name, double v, std::optional<double>& slot) {
            if (cmd.count(name) > 0) slot = v;
        };
        pin("--r", r, o.pins.r);
        pin("--mu", mu, o.pins.mu);
        pin("--s", s, o.pins.s);
        pin("--K", kick, o.pins.kick);
        pin("--p", p, o.pins.p);
        pin("--beta", beta, o.pins.beta);
        pin("--eps-c", eps_c, o.pins.eps_c);
        if (k_opt->count() > 0) o.pins.k = k;
        o.alpha = alpha;
        o.noise_sigma = sigma;
        o.t_burn = burn;
        o.verify_chaos = verify_chaos;
        o.validate();
        return o;
    }
};

MasterKey load_key(const std::string& flag) {
    if (const char* env = std::getenv("KCD_KEY"); env != nullptr && *env != '\0') {
        return MasterKey::from_hex(env);
    }
    if (flag.empty()) throw UsageError("a key is required (--key or KCD_KEY)");
    return MasterKey::from_hex(flag);
}

Nonce fresh_nonce() {
    std::random_device rd;
    std::array<std::uint8_t, Nonce::size> raw{};
    for (std::size_t i = 0; i < raw.size(); i += 4) {
        const auto v = rd();
        for (std::size_t b = 0; b < 4; ++b) raw[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return Nonce::from_bytes(raw);
}

bool is_csv(const std::string& path) {
    return std::filesystem::path(path).extension() == ".csv";
}

Tensor load_tensor(const std::string& path) {
    return is_csv(path) ? io::read_csv(path) : io::read_tensor(path);
}

void store_tensor(const std::string& path, const Tensor& t) {
    if (is_csv(path)) {
        io::write_csv(path, t);
    } else {
        io::write_tensor(path, t);
    }
}

std::string shape_string(std::span<const std::uint64_t> shape) {
    std::string out;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(shape[i]);
    }
    return out;
}

std::vector<std::uint64_t> parse_shape(const std::string& text) {
    std::vector<std::uint64_t> shape;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            shape.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("bad shape component '" + part + "'");
        }
    }
    if (shape.empty()) throw UsageError("empty shape");
    return shape;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_config(const ResolvedSystem& sys) {
    const SystemConfig& c = sys.config;
    std::cout << "map=" << map_name(c.map) << '\n';
    switch (c.map) {
        case MapKind::Logistic: std::cout << "r=" << num(c.params.r) << '\n'; break;
        case MapKind::Tent: std::cout << "mu=" << num(c.params.mu) << '\n'; break;
        case MapKind::Baker: std::cout << "s=" << num(c.params.s) << '\n'; break;
        case MapKind::Standard: std::cout << "K=" << num(c.params.kick) << '\n'; break;
        case MapKind::ArnoldCat: break;
    }
    if (c.graph.family == GraphFamily::ErdosRenyi) {
        std::cout << "graph=er\np=" << num(c.graph.p) << '\n';
    } else {
        std::cout << "graph=ws\nk=" << c.graph.k << "\nbeta=" << num(c.graph.beta) << '\n';
    }
    std::cout << "eps_c=" << num(c.graph.eps_c) << '\n'
              << "d=" << c.d << '\n'
              << "edges=" << sys.adjacency.directed_entries() / 2 << '\n'
              << "t_burn=" << c.t_burn << '\n'
              << "sigma=" << num(c.noise_sigma) << '\n'
              << "alpha=" << num(c.alpha) << '\n';
}

// Toy "hosted model" for the demo: y = x M + b along the last axis.
Tensor toy_model(const Tensor& x) {
    const std::size_t d = static_cast<std::size_t>(x.shape.back());
    const std::size_t n = x.values.size() / d;
    Tensor y{x.shape, std::vector<double>(x.values.size())};
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.1 * static_cast<double>(j % 5) - 0.2;
            for (std::size_t i = 0; i < d; ++i) {
                const double m = i == j ? 0.5 : 0.05 / (1.0 + std::fabs(double(i) - double(j)));
                acc += x.values[row * d + i] * m;
            }
            y.values[row * d + j] = acc;
        }
    }
    return y;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::fabs(a.values[i] - b.values[i]);
    return s / static_cast<double>(a.values.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kcd: keyed chaotic dynamics tensor masking"};
    app.require_subcommand(1);

    std::string key_hex, nonce_hex, in_path, out_path, shape_text, container_path;
    std::string csv_path, adjacency_csv, weights_csv;
    bool gen_nonce = false, check = false, no_discard = false;
    std::size_t d = 0, steps = 2000;
    double epsilon = 1e-8;

    auto* enc = app.add_subcommand("encrypt", "mask a tensor into a container");
    SystemFlags enc_flags;
    enc->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    auto* enc_nonce = enc->add_option("--nonce", nonce_hex, "16-byte nonce as 32 hex digits");
    auto* enc_gen = enc->add_flag("--gen-nonce", gen_nonce, "draw the nonce from OS entropy");
    enc_nonce->excludes(enc_gen);
    enc->add_option("--in", in_path, "plain tensor (.kten or .csv)")->required();
    enc->add_option("--out", out_path, "output container")->required();
    enc->add_flag("--check", check, "reopen the container and report the round-trip error");
    enc_flags.attach(*enc);

    auto* dec = app.add_subcommand("decrypt", "unmask a container");
    dec->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    dec->add_option("--in", in_path, "container")->required();
    dec->add_option("--out", out_path, "recovered tensor (.kten or .csv)")->required();

    auto* msk = app.add_subcommand("mask", "write the mask S for a shape");
    SystemFlags msk_flags;
    msk->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    msk->add_option("--nonce", nonce_hex, "16-byte nonce as 32 hex digits")->required();
    msk->add_option("--shape", shape_text, "comma-separated dims, last axis is d")->required();
    msk->add_option("--out", out_path, "mask tensor (.kten or .csv)")->required();
    msk_flags.attach(*msk);

    auto* diag = app.add_subcommand("diagnose", "estimate the largest Lyapunov exponent");
    SystemFlags diag_flags;
    diag->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    diag->add_option("--nonce", nonce_hex, "16-byte nonce as 32 hex digits")->required();
    diag->add_option("--d", d, "node count")->required();
    diag->add_option("--steps", steps, "logged steps T")->capture_default_str();
    diag->add_option("--epsilon", epsilon, "perturbation size")->capture_default_str();
    diag->add_option("--csv", csv_path, "write per-step logs here");
    diag->add_flag("--no-discard", no_discard, "keep the first 10 logs in lambda_hat");
    diag_flags.attach(*diag);

    auto* insp = app.add_subcommand("inspect", "print a resolved system or a container header");
    SystemFlags insp_flags;
    insp->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    insp->add_option("--nonce", nonce_hex, "16-byte nonce as 32 hex digits");
    insp->add_option("--d", d, "node count");
    insp->add_option("--container", container_path, "print this container's public header");
    insp->add_option("--adjacency-csv", adjacency_csv, "write A as CSV");
    insp->add_option("--weights-csv", weights_csv, "write W as CSV");
    insp_flags.attach(*insp);

    auto* demo = app.add_subcommand("demo", "input/output masking round trip through a toy model");
    SystemFlags demo_flags;
    demo->add_option("--key", key_hex, "32-byte key as 64 hex digits");
    demo->add_option("--in", in_path, "input tensor (.kten or .csv)")->required();
    demo->add_option("--nonce", nonce_hex, "input nonce (default all zero)");
    demo->add_option("--out", out_path, "write the output recovered by the key holder");
    demo_flags.attach(*demo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadArgs;
    }

    try {
        if (enc->parsed()) {
            const MasterKey key = load_key(key_hex);
            if (!gen_nonce && nonce_hex.empty()) throw UsageError("--nonce or --gen-nonce is required");
            const Nonce nonce = gen_nonce ? fresh_nonce() : Nonce::from_hex(nonce_hex);
            const CipherOptions options = enc_flags.options(*enc);
            const Tensor x = load_tensor(in_path);
            const MaskedContainer c = seal(x, key, nonce, options);
            io::write_container(out_path, c);
            std::cout << "nonce=" << nonce.hex() << '\n'
                      << "fingerprint=" << to_hex(c.fingerprint) << '\n'
                      << "shape=" << shape_string(x.shape) << '\n';
            if (check) {
                const Tensor back = unseal(io::read_container(out_path), key);
                double max_abs = 0.0;
                for (double v : x.values) max_abs = std::max(max_abs, std::fabs(v));
                const double err = max_abs_diff(back, x);
                const double bound = 4.0 * (std::nextafter(max_abs + options.alpha, INFINITY) - (max_abs + options.alpha));
                std::cout << "roundtrip_max_abs_error=" << num(err) << '\n'
                          << "roundtrip_bound=" << num(bound) << '\n';
                if (!(err <= bound)) {
                    std::cerr << "round trip exceeded its bound\n";
                    return kInternal;
                }
            }
            return kOk;
        }

        if (dec->parsed()) {
            const MasterKey key = load_key(key_hex);
            const MaskedContainer c = io::read_container(in_path);
            const Tensor x = unseal(c, key);
            store_tensor(out_path, x);
            std::cout << "nonce=" << c.nonce.hex() << '\n' << "shape=" << shape_string(x.shape) << '\n';
            return kOk;
        }

        if (msk->parsed()) {
            const MasterKey key = load_key(key_hex);
            const Nonce nonce = Nonce::from_hex(nonce_hex);
            const auto shape = parse_shape(shape_text);
            const Matrix s = generate_mask(key, nonce, shape, msk_flags.options(*msk));
            store_tensor(out_path, Tensor{shape, std::vector<double>(s.values().begin(), s.values().end())});
            std::cout << "shape=" << shape_string(shape) << '\n';
            return kOk;
        }

        if (diag->parsed()) {
            const MasterKey key = load_key(key_hex);
            const Nonce nonce = Nonce::from_hex(nonce_hex);
            CipherOptions options = diag_flags.options(*diag);
            options.verify_chaos = false;
            const ResolvedSystem sys = resolve_config(key, nonce, d, options);
            LyapunovOptions lo;
            lo.epsilon = epsilon;
            if (no_discard) lo.discard = 0;
            const LyapunovReport rep = estimate_lyapunov(sys.config, sys.weights, sys.x0, steps, lo);
            print_config(sys);
            std::cout << "lambda_hat=" << num(rep.lambda_hat) << '\n'
                      << "lambda_all=" << num(rep.lambda_all) << '\n'
                      << "steps=" << rep.steps << '\n'
                      << "epsilon=" << num(rep.epsilon) << '\n'
                      << "discarded=" << rep.discarded << '\n'
                      << "synchronized=" << (rep.synchronized ? "true" : "false") << '\n';
            if (rep.synchronized) std::cerr << "warning: trajectories synchronized\n";
            if (!csv_path.empty()) {
                io::write_csv(csv_path, Tensor{{rep.per_step_logs.size(), 1}, rep.per_step_logs});
            }
            return rep.lambda_hat > 0.0 ? kOk : kNotChaotic;
        }

        if (insp->parsed()) {
            if (!container_path.empty()) {
                const MaskedContainer c = io::read_container(container_path);
                const auto block = io::encode_options(c.options);
                std::cout << "nonce=" << c.nonce.hex() << '\n'
                          << "fingerprint=" << to_hex(c.fingerprint) << '\n'
                          << "fingerprint_ok=" << (config_fingerprint(c.options) == c.fingerprint ? "true" : "false")
                          << '\n'
                          << "options_block=" << to_hex(block) << '\n'
                          << "shape=" << shape_string(c.tensor.shape) << '\n';
                return kOk;
            }
            if (nonce_hex.empty() || d == 0) throw UsageError("inspect needs --container, or --nonce and --d");
            const MasterKey key = load_key(key_hex);
            const ResolvedSystem sys = resolve_config(key, Nonce::from_hex(nonce_hex), d, insp_flags.options(*insp));
            print_config(sys);
            if (!adjacency_csv.empty()) {
                Tensor a{{d, d}, std::vector<double>(d * d)};
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t j = 0; j < d; ++j) a.values[i * d + j] = sys.adjacency(i, j) ? 1.0 : 0.0;
                }
                io::write_csv(adjacency_csv, a);
            }
            if (!weights_csv.empty()) {
                const auto w = sys.weights.values();
                io::write_csv(weights_csv, Tensor{{d, d}, std::vector<double>(w.begin(), w.end())});
            }
            return kOk;
        }

        if (demo->parsed()) {
            const MasterKey key = load_key(key_hex);
            const Nonce nonce_in = nonce_hex.empty() ? Nonce{} : Nonce::from_hex(nonce_hex);
            const Nonce nonce_out = nonce_in.with_bit_flipped(0);
            const CipherOptions options = demo_flags.options(*demo);
            const Tensor x = load_tensor(in_path);
            const Tensor reference = toy_model(x);

            // Client and server share `key`: S masks the input, S' the output.
            const Tensor sent = encrypt(x, key, nonce_in, options);
            const Tensor served = encrypt(toy_model(decrypt(sent, key, nonce_in, options)), key, nonce_out, options);
            const Tensor received = decrypt(served, key, nonce_out, options);

            // A client holding a key one bit off.
            const MasterKey wrong = key.with_bit_flipped(0);
            const Tensor forged = encrypt(x, wrong, nonce_in, options);
            const Tensor forged_served =
                encrypt(toy_model(decrypt(forged, key, nonce_in, options)), key, nonce_out, options);
            const Tensor forged_received = decrypt(forged_served, wrong, nonce_out, options);

            std::cout << "input_nonce=" << nonce_in.hex() << '\n'
                      << "output_nonce=" << nonce_out.hex() << '\n'
                      << "correct_key_output_error=" << num(max_abs_diff(received, reference)) << '\n'
                      << "wrong_key_output_error=" << num(mean_abs_diff(forged_received, reference)) << '\n';
            if (!out_path.empty()) store_tensor(out_path, received);
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadArgs;
    } catch (const ChaosVerificationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kChaos;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
    return kBadArgs;
}

#include "kcd/graph.hpp"

#include <cmath>
#include <string>

#include "kcd/error.hpp"

namespace kcd {

namespace {

void check_ws(std::size_t d, std::size_t k, double beta) {
    if (k % 2 != 0 || k < 2 || k >= d) {
        throw Error(Errc::InvalidGraphSpec, "WS k must be even with 2 <= k < d (k=" +
                                                std::to_string(k) + ", d=" + std::to_string(d) + ")");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(Errc::InvalidGraphSpec, "WS beta must lie in [0, 1]");
    }
}

}  // namespace

void Adjacency::connect(std::size_t i, std::size_t j) {
    if (i == j) return;
    bits_[i * d_ + j] = 1;
    bits_[j * d_ + i] = 1;
}

void Adjacency::disconnect(std::size_t i, std::size_t j) {
    bits_[i * d_ + j] = 0;
    bits_[j * d_ + i] = 0;
}

std::size_t Adjacency::degree(std::size_t i) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < d_; ++j) n += bits_[i * d_ + j];
    return n;
}

std::size_t Adjacency::directed_entries() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

WeightMatrix::WeightMatrix(std::size_t d) : d_(d), w_(d * d, 0.0) { rebuild_sparse(); }

WeightMatrix WeightMatrix::from_dense(std::size_t d, std::vector<double> values) {
    if (values.size() != d * d) {
        throw Error(Errc::InvalidDimension, "weight matrix needs d*d values");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidInput, "weight matrix entries must be finite");
    }
    WeightMatrix w;
    w.d_ = d;
    w.w_ = std::move(values);
    w.rebuild_sparse();
    return w;
}

double WeightMatrix::row_sum(std::size_t i) const noexcept {
    double total = 0.0;
    for (double v : row(i)) total += v;
    return total;
}

void WeightMatrix::rebuild_sparse() {
    sparse_ = SparseRows{};
    sparse_.offsets.reserve(d_ + 1);
    sparse_.offsets.push_back(0);
    for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
            const double v = w_[i * d_ + j];
            if (v != 0.0) {
                sparse_.cols.push_back(static_cast<std::uint32_t>(j));
                sparse_.vals.push_back(v);
            }
        }
        sparse_.offsets.push_back(sparse_.vals.size());
    }
}

void GraphSpec::validate() const {
    if (d == 0) throw Error(Errc::InvalidDimension, "graph needs at least one node");
    if (!(eps_c > 0.0 && eps_c < 1.0)) {
        throw Error(Errc::InvalidGraphSpec, "coupling strength must lie in (0, 1)");
    }
    switch (family) {
        case GraphFamily::ErdosRenyi:
            if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidGraphSpec, "ER p must lie in [0, 1]");
            break;
        case GraphFamily::WattsStrogatz:
            check_ws(d, k, beta);
            break;
        default:
            throw Error(Errc::InvalidGraphSpec, "unknown graph family");
    }
}

Adjacency sample_er(std::size_t d, double p, KeyedStream& stream) {
    if (d == 0) throw Error(Errc::InvalidDimension, "ER graph needs at least one node");
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidGraphSpec, "ER p must lie in [0, 1]");
    Adjacency a(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (stream.unit_uniform() < p) a.connect(i, j);
        }
    }
    return a;
}

Adjacency sample_ws(std::size_t d, std::size_t k, double beta, KeyedStream& stream) {
    check_ws(d, k, beta);
    Adjacency a(d);
    const std::size_t half = k / 2;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 1; j <= half; ++j) a.connect(i, (i + j) % d);
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 1; j <= half; ++j) {
            if (!(stream.unit_uniform() < beta)) continue;
            if (a.degree(i) >= d - 1) continue;
            std::size_t w = 0;
            do {
                w = static_cast<std::size_t>(stream.index(d));
            } while (w == i || a(i, w));
            a.disconnect(i, (i + j) % d);
            a.connect(i, w);
        }
    }
    return a;
}

WeightMatrix sample_weights(const Adjacency& a, double eps_c, KeyedStream& stream) {
    if (!(eps_c > 0.0 && eps_c < 1.0)) {
        throw Error(Errc::InvalidGraphSpec, "coupling strength must lie in (0, 1)");
    }
    const std::size_t d = a.nodes();
    std::vector<double> w(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double u = stream.unit_uniform();
            w[i * d + j] = a(i, j) ? u : 0.0;
        }
    }

    auto row_total = [&](std::size_t i) {
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) total += w[i * d + j];
        return total;
    };

    for (std::size_t i = 0; i < d; ++i) {
        double total = row_total(i);
        if (total == 0.0) continue;
        const double scale = eps_c / total;
        for (std::size_t j = 0; j < d; ++j) w[i * d + j] = w[i * d + j] * scale;

        // Residual eps_c - total is exact (Sterbenz); fold it into the largest entry.
        for (int pass = 0; pass < 4; ++pass) {
            total = row_total(i);
            if (total == eps_c) break;
            std::size_t jmax = 0;
            for (std::size_t j = 1; j < d; ++j) {
                if (w[i * d + j] > w[i * d + jmax]) jmax = j;
            }
            w[i * d + jmax] = w[i * d + jmax] + (eps_c - total);
        }
    }
    return WeightMatrix::from_dense(d, std::move(w));
}

Adjacency sample_graph(const GraphSpec& spec, KeyedStream& stream) {
    spec.validate();
    if (spec.family == GraphFamily::WattsStrogatz) return sample_ws(spec.d, spec.k, spec.beta, stream);
    return sample_er(spec.d, spec.p, stream);
}

}  // namespace kcd

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kcd/keystream.hpp"

namespace kcd {

enum class GraphFamily : std::uint8_t { ErdosRenyi = 0, WattsStrogatz = 1 };

/// Undirected simple graph on d nodes: symmetric, zero diagonal.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t d) : d_(d), bits_(d * d, 0) {}

    std::size_t nodes() const noexcept { return d_; }
    bool operator()(std::size_t i, std::size_t j) const noexcept { return bits_[i * d_ + j] != 0; }

    void connect(std::size_t i, std::size_t j);
    void disconnect(std::size_t i, std::size_t j);

    std::size_t degree(std::size_t i) const;
    /// Number of nonzero entries, i.e. twice the undirected edge count.
    std::size_t directed_entries() const;

    friend bool operator==(const Adjacency&, const Adjacency&) = default;

private:
    std::size_t d_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Compressed nonzero rows of a weight matrix, columns ascending.
struct SparseRows {
    std::vector<std::size_t> offsets;  // size d + 1
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;

    std::size_t nodes() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t nonzeros() const noexcept { return vals.size(); }
};

/// Dense d x d coupling matrix W with a cached sparse view of its nonzeros.
class WeightMatrix {
public:
    WeightMatrix() = default;
    /// Zero matrix on d nodes.
    explicit WeightMatrix(std::size_t d);
    /// Row-major d x d values; must be finite.
    static WeightMatrix from_dense(std::size_t d, std::vector<double> values);

    std::size_t nodes() const noexcept { return d_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return w_[i * d_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {w_.data() + i * d_, d_}; }
    std::span<const double> values() const noexcept { return w_; }
    const SparseRows& sparse() const noexcept { return sparse_; }

    /// Left-to-right sum of row i, j ascending.
    double row_sum(std::size_t i) const noexcept;

private:
    void rebuild_sparse();

    std::size_t d_ = 0;
    std::vector<double> w_;
    SparseRows sparse_;
};

struct GraphSpec {
    GraphFamily family = GraphFamily::ErdosRenyi;
    std::size_t d = 0;
    double p = 0.0;       // ER edge probability
    std::size_t k = 0;    // WS even lattice degree
    double beta = 0.0;    // WS rewiring probability
    double eps_c = 0.1;   // coupling strength, target row sum of W

    /// Throws InvalidGraphSpec / InvalidDimension when the active family's fields are out of range.
    void validate() const;
};

/// One unit uniform per unordered pair (i < j), row-major; edge iff draw < p.
Adjacency sample_er(std::size_t d, double p, KeyedStream& stream);

/// Ring lattice i ~ i +- 1..k/2 (mod d), then each lattice edge (i, i + j),
/// i outer and j inner, is rewired with probability beta to a uniform node
/// that is neither i nor already adjacent to i.
Adjacency sample_ws(std::size_t d, std::size_t k, double beta, KeyedStream& stream);

/// W = U (.) A with U uniform per ordered pair (d*d draws, row-major), then
/// every nonzero row rescaled to sum to eps_c.
WeightMatrix sample_weights(const Adjacency& a, double eps_c, KeyedStream& stream);

Adjacency sample_graph(const GraphSpec& spec, KeyedStream& stream);

}  // namespace kcd

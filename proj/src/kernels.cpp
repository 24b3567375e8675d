#include <cmath>
#include <cstdint>

#include "kcd/dynamics.hpp"

namespace kcd::kernels {

namespace {

struct Pair {
    double hi;
    double lo;
};

inline Pair two_sum(double a, double b) noexcept {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline Pair two_prod(double a, double b) noexcept {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

// The operation order here is normative: the Python reference reproduces it
// bit for bit, and every caller depends on it for cross-run determinism.
inline double diffuse_entry(const SparseRows& w, const Matrix& y, std::size_t i, std::size_t c) noexcept {
    const double yi = y(i, c);
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t e = w.offsets[i]; e < w.offsets[i + 1]; ++e) {
        const double wij = w.vals[e];
        const Pair diff = two_sum(y(w.cols[e], c), -yi);
        const Pair prod = two_prod(wij, diff.hi);
        const Pair acc = two_sum(sum, prod.hi);
        sum = acc.hi;
        comp = comp + ((prod.lo + acc.lo) + wij * diff.lo);
    }
    const Pair head = two_sum(yi, sum);
    return head.hi + (head.lo + comp);
}

// Below this much work per step the fork/join costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 14;

}  // namespace

void diffuse_serial(const SparseRows& w, const Matrix& y, Matrix& out) {
    const std::size_t d = y.rows();
    const std::size_t m = y.cols();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t c = 0; c < m; ++c) out(i, c) = diffuse_entry(w, y, i, c);
    }
}

void diffuse(const SparseRows& w, const Matrix& y, Matrix& out) {
    const auto d = static_cast<std::int64_t>(y.rows());
    const std::size_t m = y.cols();
    const std::size_t work = (w.nonzeros() + y.rows()) * m;
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
    for (std::int64_t i = 0; i < d; ++i) {
        const auto row = static_cast<std::size_t>(i);
        for (std::size_t c = 0; c < m; ++c) out(row, c) = diffuse_entry(w, y, row, c);
    }
}

}  // namespace kcd::kernels

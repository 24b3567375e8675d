#include <doctest.h>

#include <cmath>

#include "kcd/error.hpp"
#include "kcd/graph.hpp"
#include "support.hpp"

using namespace kcd;
using kcd::test::fixture;
using kcd::test::hex_double;

namespace {

void check_adjacency(const Adjacency& a, const nlohmann::json& rows) {
    REQUIRE(a.nodes() == rows.size());
    for (std::size_t i = 0; i < a.nodes(); ++i) {
        for (std::size_t j = 0; j < a.nodes(); ++j) CHECK(a(i, j) == (rows[i][j].get<int>() == 1));
    }
}

void check_simple(const Adjacency& a) {
    for (std::size_t i = 0; i < a.nodes(); ++i) {
        CHECK_FALSE(a(i, i));
        for (std::size_t j = 0; j < a.nodes(); ++j) CHECK(a(i, j) == a(j, i));
    }
}

double ulp(double x) { return std::nextafter(x, INFINITY) - x; }

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return Errc::IoError;
}

}  // namespace

TEST_CASE("ER extreme probabilities") {
    KeyedStream s(Digest{});
    for (std::size_t d : {1u, 2u, 7u}) {
        const Adjacency empty = sample_er(d, 0.0, s);
        CHECK(empty.directed_entries() == 0);
    }
    const Adjacency full = sample_er(4, 1.0, s);
    CHECK(full.directed_entries() == 12);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(full(i, j) == (i != j));
    }
}

TEST_CASE("ER draws one uniform per pair in row-major order") {
    KeyedStream s(Digest{});
    const Adjacency a = sample_er(6, 0.5, s);
    check_adjacency(a, fixture()["er_d6_p05_zero"]);
    CHECK(s.bytes_consumed() == 15 * 8);

    KeyedStream replay(Digest{});
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = i + 1; j < 6; ++j) CHECK(a(i, j) == (replay.unit_uniform() < 0.5));
    }
}

TEST_CASE("ER rejects bad specs") {
    KeyedStream s(Digest{});
    CHECK(code_of([&] { sample_er(0, 0.5, s); }) == Errc::InvalidDimension);
    CHECK(code_of([&] { sample_er(3, 1.5, s); }) == Errc::InvalidGraphSpec);
}

TEST_CASE("WS without rewiring is the ring lattice") {
    KeyedStream s(Digest{});
    const Adjacency a = sample_ws(8, 4, 0.0, s);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a.degree(i) == 4);
        for (std::size_t j = 0; j < 8; ++j) {
            const std::size_t gap = (j + 8 - i) % 8;
            CHECK(a(i, j) == (gap == 1 || gap == 2 || gap == 6 || gap == 7));
        }
    }
}

TEST_CASE("WS full rewiring matches the traced stream") {
    KeyedStream s(Digest{});
    const Adjacency a = sample_ws(8, 2, 1.0, s);
    check_adjacency(a, fixture()["ws_d8_k2_b1_zero"]);
    CHECK(a.directed_entries() == 16);
    check_simple(a);
}

TEST_CASE("WS partial rewiring matches the traced stream and is deterministic") {
    KeyedStream s(Digest{});
    const Adjacency a = sample_ws(10, 4, 0.5, s);
    check_adjacency(a, fixture()["ws_d10_k4_b05_zero"]);
    KeyedStream t(Digest{});
    CHECK(sample_ws(10, 4, 0.5, t) == a);
    check_simple(a);
    CHECK(a.directed_entries() == 40);
}

TEST_CASE("WS rejects bad specs") {
    KeyedStream s(Digest{});
    CHECK(code_of([&] { sample_ws(8, 3, 0.1, s); }) == Errc::InvalidGraphSpec);
    CHECK(code_of([&] { sample_ws(4, 4, 0.1, s); }) == Errc::InvalidGraphSpec);
    CHECK(code_of([&] { sample_ws(8, 0, 0.1, s); }) == Errc::InvalidGraphSpec);
    CHECK(code_of([&] { sample_ws(8, 2, 1.1, s); }) == Errc::InvalidGraphSpec);
}

TEST_CASE("graphs are symmetric with zero diagonal across families") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        KeyedStream s(derive_subkeys(test::key_from_seed(seed), Nonce{}).graph);
        const std::size_t d = 5 + seed % 20;
        check_simple(sample_er(d, double(seed % 11) / 10.0, s));
        check_simple(sample_ws(d, 2 + 2 * (seed % 2), double(seed % 6) / 5.0, s));
    }
}

TEST_CASE("weights of an empty graph are zero") {
    KeyedStream s(Digest{});
    const WeightMatrix w = sample_weights(Adjacency(5), 0.2, s);
    for (double v : w.values()) CHECK(v == 0.0);
    CHECK(w.sparse().nonzeros() == 0);
}

TEST_CASE("single edge gets exactly eps_c per row") {
    Adjacency a(2);
    a.connect(0, 1);
    KeyedStream s(Digest{});
    const WeightMatrix w = sample_weights(a, 0.15, s);
    CHECK(w(0, 1) == 0.15);
    CHECK(w(1, 0) == 0.15);
    CHECK(w(0, 0) == 0.0);
    CHECK(w(1, 1) == 0.0);
}

TEST_CASE("complete d=4 weights match the traced uniforms") {
    KeyedStream s(Digest{});
    const Adjacency complete = sample_er(4, 1.0, s);
    KeyedStream fresh(Digest{});
    const WeightMatrix w = sample_weights(complete, 0.1, fresh);
    const auto& expected = fixture()["weights_d4_complete_eps01_zero"];
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(w(i, j) == hex_double(expected[i][j].get<std::string>()));
        CHECK(std::fabs(w.row_sum(i) - 0.1) <= ulp(0.1));
    }
}

TEST_CASE("weight support and row sums") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        KeyedStream s(derive_subkeys(test::key_from_seed(seed), Nonce{}).graph);
        const std::size_t d = 3 + seed % 30;
        const double eps_c = 0.05 + 0.9 * s.unit_uniform();
        const Adjacency a = seed % 2 ? sample_er(d, 0.3, s) : sample_ws(d, 2, 0.3, s);
        const WeightMatrix w = sample_weights(a, eps_c, s);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                CHECK(w(i, j) >= 0.0);
                if (!a(i, j)) CHECK(w(i, j) == 0.0);
            }
            if (a.degree(i) == 0) {
                CHECK(w.row_sum(i) == 0.0);
            } else {
                CHECK(std::fabs(w.row_sum(i) - eps_c) <= 4 * ulp(eps_c));
            }
        }
        KeyedStream again(derive_subkeys(test::key_from_seed(seed), Nonce{}).graph);
        again.unit_uniform();
        const Adjacency a2 = seed % 2 ? sample_er(d, 0.3, again) : sample_ws(d, 2, 0.3, again);
        CHECK(a2 == a);
        CHECK(std::ranges::equal(sample_weights(a2, eps_c, again).values(), w.values()));
    }
}

TEST_CASE("sparse view mirrors the dense matrix") {
    KeyedStream s(Digest{});
    const Adjacency a = sample_ws(12, 4, 0.4, s);
    const WeightMatrix w = sample_weights(a, 0.2, s);
    const SparseRows& sp = w.sparse();
    CHECK(sp.nodes() == 12);
    CHECK(sp.nonzeros() == a.directed_entries());
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t e = sp.offsets[i]; e < sp.offsets[i + 1]; ++e) {
            CHECK(sp.vals[e] == w(i, sp.cols[e]));
            if (e > sp.offsets[i]) CHECK(sp.cols[e] > sp.cols[e - 1]);
        }
    }
}

TEST_CASE("spec validation") {
    GraphSpec g;
    g.d = 5;
    g.family = GraphFamily::WattsStrogatz;
    g.k = 4;
    g.beta = 0.2;
    g.eps_c = 0.1;
    CHECK_NOTHROW(g.validate());
    g.k = 6;
    CHECK(code_of([&] { g.validate(); }) == Errc::InvalidGraphSpec);
    g.k = 4;
    g.eps_c = 1.0;
    CHECK(code_of([&] { g.validate(); }) == Errc::InvalidGraphSpec);
    g.d = 0;
    CHECK(code_of([&] { g.validate(); }) == Errc::InvalidDimension);
    CHECK(code_of([] { WeightMatrix::from_dense(2, {0.0, 1.0, 2.0}); }) == Errc::InvalidDimension);
    CHECK(code_of([] { WeightMatrix::from_dense(1, {NAN}); }) == Errc::InvalidInput);
}

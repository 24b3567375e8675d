#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcd/keystream.hpp"
#include "kcd/matrix.hpp"

namespace kcd::test {

// Doubles in the fixture are the hex of their little-endian binary64 bytes.
inline double hex_double(const std::string& hex) {
    const auto raw = kcd::from_hex(hex);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < 8; ++i) bits |= std::uint64_t(raw.at(i)) << (8 * i);
    return std::bit_cast<double>(bits);
}

inline const nlohmann::json& fixture() {
    static const nlohmann::json doc = [] {
        std::ifstream in(std::string(KCD_FIXTURE_DIR) + "/reference_trace.json");
        return nlohmann::json::parse(in);
    }();
    return doc;
}

inline Matrix hex_matrix(const nlohmann::json& rows) {
    Matrix m(rows.size(), rows.at(0).size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = hex_double(rows[i][j].get<std::string>());
    }
    return m;
}

inline std::vector<std::uint8_t> golden(const std::string& name) {
    std::ifstream in(std::string(KCD_GOLDEN_DIR) + "/" + name, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline MasterKey zero_key() { return MasterKey{}; }
inline Nonce zero_nonce() { return Nonce{}; }

inline MasterKey key_from_seed(std::uint64_t seed) {
    std::uint8_t raw[MasterKey::size];
    for (std::size_t i = 0; i < sizeof raw; ++i) raw[i] = static_cast<std::uint8_t>((seed >> (8 * (i % 8))) ^ (i * 37));
    return MasterKey::from_bytes(raw);
}

}  // namespace kcd::test

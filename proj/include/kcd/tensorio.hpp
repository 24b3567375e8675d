#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcd/cipher.hpp"

namespace kcd::io {

// Plain tensor file, all integers little-endian:
//   "KTEN" | version u16 = 1 | rank u8 | dims u64[rank] | payload f64[prod(dims)]
//
// Masked container:
//   "KCDM" | version u16 = 1 | nonce[16] | fingerprint[8] | options block |
//   rank u8 | dims u64[rank] | payload f64[prod(dims)]
//
// Options block:
//   map u8 (0xFF = auto) | family u8 (0xFF = auto) | pin flags u16 |
//   f64 per set flag, in flag order r, mu, s, K, p, k, beta, eps_c |
//   t_burn u32 | sigma f64 | alpha f64

inline constexpr std::uint16_t kFormatVersion = 1;

std::vector<std::uint8_t> encode_options(const CipherOptions& options);
/// Parses one options block starting at `bytes`; `consumed` receives its length.
CipherOptions decode_options(std::span<const std::uint8_t> bytes, std::size_t& consumed);

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_container(const MaskedContainer& container);
MaskedContainer decode_container(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

void write_container(const std::filesystem::path& path, const MaskedContainer& container);
MaskedContainer read_container(const std::filesystem::path& path);

/// One row per line, comma-separated. A single line gives a rank-1 tensor,
/// several lines a rank-2 tensor. Ragged rows are InvalidInput.
Tensor parse_csv(std::string_view text);
/// Rank-1 tensors print on one line; higher ranks print (n, d) rows with
/// d the last axis. Values use 17 significant digits.
std::string format_csv(const Tensor& tensor);

Tensor read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Tensor& tensor);

}  // namespace kcd::io

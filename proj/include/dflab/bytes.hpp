#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dflab {

using Bytes = std::vector<uint8_t>;

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(std::string_view hex);

// Big-endian 16/32-bit writers, used by the KDF and wire encodings.
void put_be16(Bytes &out, uint16_t v);
void put_be32(Bytes &out, uint32_t v);

void append(Bytes &out, std::span<const uint8_t> data);
void append(Bytes &out, std::string_view s);

// memcmp-style lexicographic order; shorter input wins ties.
int compare_bytes(std::span<const uint8_t> a, std::span<const uint8_t> b);

// Comparison without data-dependent early exit, for confirm-tag checks.
bool equal_constant_time(std::span<const uint8_t> a, std::span<const uint8_t> b);

} // namespace dflab

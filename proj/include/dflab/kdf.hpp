#pragma once

#include <array>
#include <span>
#include <string_view>

#include "dflab/bytes.hpp"

namespace dflab {

using Digest = std::array<uint8_t, 32>;

Digest sha256(std::span<const uint8_t> data);
Digest hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data);

/**
 * Counter-mode expansion of a 32-byte seed into n_bits of output.
 *
 * Blocks are HMAC-SHA256(seed, be16(i) || label || be16(n_bits)) for
 * i = 1, 2, ... When n_bits is not a multiple of 8 the output is packed
 * into ceil(n_bits / 8) bytes and shifted right so the value occupies
 * the low n_bits, matching the big-endian candidate reduction used in
 * the derivation loop.
 */
Bytes kdf_expand_bits(const Digest &seed, std::string_view label, size_t n_bits);

} // namespace dflab

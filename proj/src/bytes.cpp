#include "dflab/bytes.hpp"

#include <stdexcept>

namespace dflab {

static const char *hex_digits = "0123456789abcdef";

std::string to_hex(std::span<const uint8_t> data) {
	std::string out;
	out.reserve(data.size() * 2);
	for (uint8_t b : data) {
		out.push_back(hex_digits[b >> 4]);
		out.push_back(hex_digits[b & 0x0f]);
	}
	return out;
}

static int hex_val(char c) {
	if (c >= '0' && c <= '9')
		return c - '0';
	if (c >= 'a' && c <= 'f')
		return c - 'a' + 10;
	if (c >= 'A' && c <= 'F')
		return c - 'A' + 10;
	return -1;
}

Bytes from_hex(std::string_view hex) {
	if (hex.size() % 2 != 0)
		throw std::invalid_argument("hex string has odd length");
	Bytes out;
	out.reserve(hex.size() / 2);
	for (size_t i = 0; i < hex.size(); i += 2) {
		int hi = hex_val(hex[i]);
		int lo = hex_val(hex[i + 1]);
		if (hi < 0 || lo < 0)
			throw std::invalid_argument("invalid hex digit");
		out.push_back(static_cast<uint8_t>(hi << 4 | lo));
	}
	return out;
}

void put_be16(Bytes &out, uint16_t v) {
	out.push_back(static_cast<uint8_t>(v >> 8));
	out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put_be32(Bytes &out, uint32_t v) {
	out.push_back(static_cast<uint8_t>(v >> 24));
	out.push_back(static_cast<uint8_t>(v >> 16));
	out.push_back(static_cast<uint8_t>(v >> 8));
	out.push_back(static_cast<uint8_t>(v & 0xff));
}

void append(Bytes &out, std::span<const uint8_t> data) {
	out.insert(out.end(), data.begin(), data.end());
}

void append(Bytes &out, std::string_view s) {
	out.insert(out.end(), s.begin(), s.end());
}

int compare_bytes(std::span<const uint8_t> a, std::span<const uint8_t> b) {
	size_t n = std::min(a.size(), b.size());
	for (size_t i = 0; i < n; i++) {
		if (a[i] != b[i])
			return a[i] < b[i] ? -1 : 1;
	}
	if (a.size() == b.size())
		return 0;
	return a.size() < b.size() ? -1 : 1;
}

bool equal_constant_time(std::span<const uint8_t> a, std::span<const uint8_t> b) {
	if (a.size() != b.size())
		return false;
	uint8_t diff = 0;
	for (size_t i = 0; i < a.size(); i++)
		diff |= a[i] ^ b[i];
	return diff == 0;
}

} // namespace dflab

#include "dflab/kdf.hpp"

#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace dflab {

Digest sha256(std::span<const uint8_t> data) {
	Digest out;
	SHA256(data.data(), data.size(), out.data());
	return out;
}

Digest hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data) {
	Digest out;
	unsigned int len = 0;
	if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
	          data.data(), data.size(), out.data(), &len) ||
	    len != out.size())
		throw std::runtime_error("HMAC-SHA256 failed");
	return out;
}

static void shift_right_bits(Bytes &buf, unsigned bits) {
	if (bits == 0 || buf.empty())
		return;
	for (size_t i = buf.size() - 1; i > 0; i--)
		buf[i] = static_cast<uint8_t>((buf[i - 1] << (8 - bits)) | (buf[i] >> bits));
	buf[0] >>= bits;
}

Bytes kdf_expand_bits(const Digest &seed, std::string_view label, size_t n_bits) {
	if (n_bits == 0)
		return {};
	size_t n_bytes = (n_bits + 7) / 8;
	Bytes out;
	out.reserve(n_bytes + 32);
	uint16_t counter = 1;
	while (out.size() < n_bytes) {
		Bytes block;
		put_be16(block, counter++);
		append(block, label);
		put_be16(block, static_cast<uint16_t>(n_bits));
		Digest d = hmac_sha256(seed, block);
		out.insert(out.end(), d.begin(), d.end());
	}
	out.resize(n_bytes);
	shift_right_bits(out, static_cast<unsigned>((8 - n_bits % 8) % 8));
	return out;
}

} // namespace dflab

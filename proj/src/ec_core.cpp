#include "dflab/ec_core.hpp"

#include <stdexcept>

namespace dflab {

BigInt bigint_from_bytes(std::span<const uint8_t> data) {
	BigInt v;
	if (!data.empty())
		mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
	return v;
}

Bytes bigint_to_fixed_bytes(const BigInt &v, size_t len) {
	if (sgn(v) < 0)
		throw std::invalid_argument("cannot encode negative value");
	size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
	if (v == 0)
		need = 0;
	if (need > len)
		throw std::invalid_argument("value too large for fixed-width encoding");
	Bytes out(len, 0);
	size_t written = 0;
	if (need > 0)
		mpz_export(out.data() + (len - need), &written, 1, 1, 1, 0, v.get_mpz_t());
	return out;
}

BigInt CurveParams::rhs(const BigInt &x) const {
	BigInt r = (x * x) % p;
	r = (r * x) % p;
	r = (r + a * x + b) % p;
	return r;
}

static CurveParams make_curve(std::string name, const char *p_hex,
                              const char *a_hex, const char *b_hex,
                              const char *gx_hex, const char *gy_hex,
                              const char *q_hex) {
	CurveParams c;
	c.name = std::move(name);
	c.p = BigInt(p_hex, 16);
	c.a = BigInt(a_hex, 16);
	c.b = BigInt(b_hex, 16);
	c.g = CurvePoint::affine(BigInt(gx_hex, 16), BigInt(gy_hex, 16));
	c.q = BigInt(q_hex, 16);
	c.h = 1;
	c.bit_len = mpz_sizeinbase(c.p.get_mpz_t(), 2);
	c.byte_len = (c.bit_len + 7) / 8;
	return c;
}

const CurveParams &p256() {
	static const CurveParams c = make_curve(
	    "P-256",
	    "ffffffff00000001000000000000000000000000ffffffffffffffffffffffff",
	    "ffffffff00000001000000000000000000000000fffffffffffffffffffffffc",
	    "5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b",
	    "6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296",
	    "4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5",
	    "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551");
	return c;
}

const CurveParams &p384() {
	static const CurveParams c = make_curve(
	    "P-384",
	    "fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"
	    "effffffff0000000000000000ffffffff",
	    "fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"
	    "effffffff0000000000000000fffffffc",
	    "b3312fa7e23ee7e4988e056be3f82d19181d9c6efe8141120314088f5013875a"
	    "c656398d8a2ed19d2a85c8edd3ec2aef",
	    "aa87ca22be8b05378eb1c71ef320ad746e1d3b628ba79b9859f741e082542a38"
	    "5502f25dbf55296c3a545e3872760ab7",
	    "3617de4a96262c6f5d9e98bf9292dc29f8f41dbd289a147ce9da3113b5f0b8c0"
	    "0a60b1ce1d7e819d7a431d7c90ea0e5f",
	    "ffffffffffffffffffffffffffffffffffffffffffffffffc7634d81f4372ddf"
	    "581a0db248b0a77aecec196accc52973");
	return c;
}

const CurveParams &toy11() {
	// y^2 = x^3 + x + 6 over GF(11): 13 points, so every point generates.
	static const CurveParams c =
	    make_curve("toy-11", "b", "1", "6", "2", "7", "d");
	return c;
}

const CurveParams &curve_by_name(std::string_view name) {
	if (name == "P-256" || name == "p-256" || name == "p256")
		return p256();
	if (name == "P-384" || name == "p-384" || name == "p384")
		return p384();
	if (name == "toy-11" || name == "toy11")
		return toy11();
	throw std::invalid_argument("unknown curve: " + std::string(name));
}

BigInt mod_exp(const BigInt &base, const BigInt &exponent, const BigInt &p) {
	BigInt out;
	mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(),
	         p.get_mpz_t());
	return out;
}

int legendre_naive(const BigInt &x, const BigInt &p) {
	BigInt r = mod_exp(x % p, (p - 1) / 2, p);
	if (r == 0)
		return 0;
	return r == 1 ? 1 : -1;
}

BigInt rand_below(const BigInt &bound, Rng &rng) {
	if (bound <= 0)
		throw std::invalid_argument("rand_below: bound must be positive");
	size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
	size_t len = (bits + 7) / 8;
	unsigned top_mask =
	    bits % 8 == 0 ? 0xff : static_cast<unsigned>((1u << (bits % 8)) - 1);
	Bytes buf(len);
	for (;;) {
		rng.fill(buf);
		buf[0] &= static_cast<uint8_t>(top_mask);
		BigInt v = bigint_from_bytes(buf);
		if (v < bound)
			return v;
	}
}

BlindingState make_blinding(const CurveParams &curve, Rng &rng) {
	BlindingState st;
	bool have_qr = false, have_qnr = false;
	while (!have_qr || !have_qnr) {
		BigInt cand = rand_below(curve.p, rng);
		st.draws_used++;
		int sym = legendre_naive(cand, curve.p);
		if (sym == 1 && !have_qr) {
			st.qr = cand;
			have_qr = true;
		} else if (sym == -1 && !have_qnr) {
			st.qnr = cand;
			have_qnr = true;
		}
	}
	return st;
}

int legendre_blinded(const BigInt &x, const CurveParams &curve,
                     const BlindingState &blind, Rng &rng) {
	const BigInt &p = curve.p;
	BigInt v = x % p;
	if (v == 0)
		return 0;
	// fresh mask per test: v * r^2, then a residue or non-residue factor
	BigInt r = rand_below(p - 1, rng) + 1;
	bool use_qnr = (rng.next_u64() & 1) != 0;
	BigInt masked = (v * r) % p;
	masked = (masked * r) % p;
	masked = (masked * (use_qnr ? blind.qnr : blind.qr)) % p;
	int sym = legendre_naive(masked, p);
	return use_qnr ? -sym : sym;
}

BigInt sqrt_mod_p(const BigInt &x, const BigInt &p) {
	if (p % 4 != 3)
		throw std::domain_error("sqrt_mod_p requires p = 3 (mod 4)");
	BigInt v = x % p;
	if (v == 0)
		return 0;
	BigInt s = mod_exp(v, (p + 1) / 4, p);
	if ((s * s) % p != v)
		throw std::domain_error("sqrt_mod_p: input is not a quadratic residue");
	return s;
}

static BigInt mod_inverse(const BigInt &v, const BigInt &p) {
	BigInt out;
	if (!mpz_invert(out.get_mpz_t(), v.get_mpz_t(), p.get_mpz_t()))
		throw std::domain_error("value not invertible mod p");
	return out;
}

CurvePoint point_add(const CurveParams &curve, const CurvePoint &p1,
                     const CurvePoint &p2) {
	const BigInt &p = curve.p;
	if (p1.inf)
		return p2;
	if (p2.inf)
		return p1;
	if (p1.x == p2.x && (p1.y + p2.y) % p == 0)
		return CurvePoint::infinity();

	BigInt lambda;
	if (p1.x == p2.x && p1.y == p2.y) {
		BigInt num = (3 * p1.x * p1.x + curve.a) % p;
		lambda = (num * mod_inverse((2 * p1.y) % p, p)) % p;
	} else {
		BigInt num = (p2.y - p1.y) % p;
		BigInt den = (p2.x - p1.x) % p;
		lambda = (num * mod_inverse(den, p)) % p;
	}
	if (lambda < 0)
		lambda += p;

	BigInt x3 = (lambda * lambda - p1.x - p2.x) % p;
	if (x3 < 0)
		x3 += p;
	BigInt y3 = (lambda * (p1.x - x3) - p1.y) % p;
	if (y3 < 0)
		y3 += p;
	return CurvePoint::affine(x3, y3);
}

CurvePoint point_negate(const CurveParams &curve, const CurvePoint &pt) {
	if (pt.inf)
		return pt;
	BigInt ny = pt.y == 0 ? BigInt(0) : curve.p - pt.y;
	return CurvePoint::affine(pt.x, ny);
}

CurvePoint scalar_mul(const CurveParams &curve, const BigInt &k,
                      const CurvePoint &pt) {
	if (sgn(k) < 0)
		throw std::invalid_argument("scalar_mul: negative scalar");
	CurvePoint acc = CurvePoint::infinity();
	if (k == 0 || pt.inf)
		return acc;
	long bits = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2));
	for (long i = bits - 1; i >= 0; i--) {
		acc = point_add(curve, acc, acc);
		if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i)))
			acc = point_add(curve, acc, pt);
	}
	return acc;
}

bool is_on_curve(const CurveParams &curve, const CurvePoint &pt) {
	if (pt.inf)
		return true;
	if (sgn(pt.x) < 0 || pt.x >= curve.p || sgn(pt.y) < 0 || pt.y >= curve.p)
		return false;
	return (pt.y * pt.y) % curve.p == curve.rhs(pt.x);
}

} // namespace dflab

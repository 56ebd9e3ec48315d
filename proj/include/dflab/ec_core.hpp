#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "dflab/bytes.hpp"
#include "dflab/rng.hpp"

namespace dflab {

// Field elements are BigInt residues kept in [0, p) by every operation
// here; value semantics come with mpz_class.
using BigInt = mpz_class;

BigInt bigint_from_bytes(std::span<const uint8_t> data);
// Big-endian, zero-padded to len. Throws if the value does not fit.
Bytes bigint_to_fixed_bytes(const BigInt &v, size_t len);

struct CurvePoint {
	BigInt x;
	BigInt y;
	bool inf = true;

	static CurvePoint infinity() { return {}; }
	static CurvePoint affine(BigInt px, BigInt py) {
		return CurvePoint{std::move(px), std::move(py), false};
	}
	bool operator==(const CurvePoint &o) const {
		if (inf || o.inf)
			return inf == o.inf;
		return x == o.x && y == o.y;
	}
};

/**
 * Short-Weierstrass curve y^2 = x^3 + ax + b over GF(p), cofactor 1.
 */
struct CurveParams {
	std::string name;
	BigInt p;
	BigInt a;
	BigInt b;
	CurvePoint g;
	BigInt q; // order of g
	int h = 1;
	size_t bit_len = 0;
	size_t byte_len = 0;

	// x^3 + ax + b mod p
	BigInt rhs(const BigInt &x) const;
};

// Registry of named curves: "P-256", "P-384", plus the tiny test curve
// "toy-11" (p = 11, 13 points) used by exhaustive oracles.
const CurveParams &curve_by_name(std::string_view name);
const CurveParams &p256();
const CurveParams &p384();
const CurveParams &toy11();

BigInt mod_exp(const BigInt &base, const BigInt &exponent, const BigInt &p);

// Euler-criterion Legendre symbol: x^((p-1)/2) mapped to {-1, 0, +1}.
// The direct form is the leaky one real implementations blind.
int legendre_naive(const BigInt &x, const BigInt &p);

/**
 * Per-session blinding material for the quadratic residue test: a known
 * residue and non-residue, regenerated per derivation. draws_used
 * reports how many random candidates were classified to find the pair,
 * which is what a spy counting RNG calls observes before the loop.
 */
struct BlindingState {
	BigInt qr;
	BigInt qnr;
	int draws_used = 0;
};

BlindingState make_blinding(const CurveParams &curve, Rng &rng);

// Masked residue test: evaluates the symbol of x * r^2 * (qr or qnr)
// with fresh r per call and unblinds the sign. Equals legendre_naive
// for every x.
int legendre_blinded(const BigInt &x, const CurveParams &curve,
                     const BlindingState &blind, Rng &rng);

// Square root for p = 3 (mod 4) via x^((p+1)/4). Caller must have
// checked residuosity; throws std::domain_error otherwise.
BigInt sqrt_mod_p(const BigInt &x, const BigInt &p);

CurvePoint point_add(const CurveParams &curve, const CurvePoint &p1,
                     const CurvePoint &p2);
CurvePoint point_negate(const CurveParams &curve, const CurvePoint &p);
CurvePoint scalar_mul(const CurveParams &curve, const BigInt &k,
                      const CurvePoint &p);
bool is_on_curve(const CurveParams &curve, const CurvePoint &p);

// Uniform in [0, bound) via rejection from masked byte draws.
BigInt rand_below(const BigInt &bound, Rng &rng);

} // namespace dflab

#include <doctest.h>

#include <set>

#include "dflab/ec_core.hpp"

using namespace dflab;

// Brute-force residue table mod a small prime: the oracle the fast
// paths are checked against.
static std::set<long> squares_mod(long p) {
	std::set<long> sq;
	for (long y = 1; y < p; y++)
		sq.insert((y * y) % p);
	return sq;
}

TEST_CASE("mod_exp basics") {
	BigInt p = 11;
	CHECK(mod_exp(7, 0, p) == 1);
	// 3^5 = 243 = 22*11 + 1
	CHECK(mod_exp(3, 5, p) == 1);
	BigInt big("123456789123456789");
	CHECK(mod_exp(big, 1, p) == big % p);

	// Fermat on both the toy prime and P-256
	for (long x : {1L, 2L, 5L, 10L})
		CHECK(mod_exp(x, p - 1, p) == 1);
	const CurveParams &c = p256();
	Rng rng(7);
	for (int i = 0; i < 4; i++) {
		BigInt x = rand_below(c.p - 1, rng) + 1;
		CHECK(mod_exp(x, c.p - 1, c.p) == 1);
	}
}

TEST_CASE("legendre_naive against the square table mod 11") {
	BigInt p = 11;
	std::set<long> sq = squares_mod(11);
	CHECK(legendre_naive(0, p) == 0);
	CHECK(legendre_naive(1, p) == 1);
	CHECK(legendre_naive(3, p) == 1); // 5^2 = 3 (mod 11)
	for (long x = 1; x < 11; x++)
		CHECK(legendre_naive(x, p) == (sq.count(x) ? 1 : -1));
}

TEST_CASE("legendre_naive against GMP's Legendre on P-256") {
	const CurveParams &c = p256();
	Rng rng(11);
	for (int i = 0; i < 200; i++) {
		BigInt x = rand_below(c.p, rng);
		int expect = mpz_legendre(x.get_mpz_t(), c.p.get_mpz_t());
		CHECK(legendre_naive(x, c.p) == expect);
	}
}

TEST_CASE("blinded test equals the naive symbol") {
	Rng rng(42);

	SUBCASE("exhaustive mod 11") {
		const CurveParams &c = toy11();
		BlindingState blind = make_blinding(c, rng);
		CHECK(legendre_naive(blind.qr, c.p) == 1);
		CHECK(legendre_naive(blind.qnr, c.p) == -1);
		CHECK(blind.draws_used >= 2);
		for (long x = 0; x < 11; x++) {
			for (int rep = 0; rep < 20; rep++)
				CHECK(legendre_blinded(x, c, blind, rng) ==
				      legendre_naive(x, c.p));
		}
	}

	SUBCASE("random elements on P-256") {
		const CurveParams &c = p256();
		BlindingState blind = make_blinding(c, rng);
		CHECK(legendre_blinded(0, c, blind, rng) == 0);
		CHECK(legendre_blinded(blind.qnr, c, blind, rng) == -1);
		for (int i = 0; i < 10000; i++) {
			BigInt x = rand_below(c.p, rng);
			CHECK(legendre_blinded(x, c, blind, rng) == legendre_naive(x, c.p));
		}
	}
}

TEST_CASE("residue fraction is one half") {
	// the empirical ground for the per-iteration success probability
	const CurveParams &c = p256();
	Rng rng(3);
	int n = 10000, passes = 0;
	for (int i = 0; i < n; i++) {
		BigInt x = rand_below(c.p - 1, rng) + 1;
		if (legendre_naive(x, c.p) == 1)
			passes++;
	}
	double rate = static_cast<double>(passes) / n;
	CHECK(rate > 0.48);
	CHECK(rate < 0.52);
}

TEST_CASE("sqrt_mod_p") {
	BigInt p = 11;
	CHECK(sqrt_mod_p(0, p) == 0);
	CHECK(sqrt_mod_p(4, p) == 9); // 9^2 = 81 = 4 (mod 11)
	CHECK_THROWS_AS(sqrt_mod_p(2, p), std::domain_error); // non-residue

	const CurveParams &c = p256();
	Rng rng(5);
	int checked = 0;
	while (checked < 50) {
		BigInt x = rand_below(c.p, rng);
		if (legendre_naive(x, c.p) != 1)
			continue;
		BigInt s = sqrt_mod_p(x, c.p);
		CHECK((s * s) % c.p == x);
		checked++;
	}
}

// All 13 points of toy-11, found by scanning the curve equation.
static std::vector<CurvePoint> enumerate_toy_points() {
	const CurveParams &c = toy11();
	std::vector<CurvePoint> pts;
	pts.push_back(CurvePoint::infinity());
	for (long x = 0; x < 11; x++) {
		for (long y = 0; y < 11; y++) {
			if ((BigInt(y) * y) % c.p == c.rhs(x))
				pts.push_back(CurvePoint::affine(x, y));
		}
	}
	return pts;
}

TEST_CASE("toy curve group law, exhaustively") {
	const CurveParams &c = toy11();
	std::vector<CurvePoint> pts = enumerate_toy_points();
	REQUIRE(pts.size() == 13); // group order q = 13, cofactor 1

	auto contains = [&](const CurvePoint &p) {
		for (const auto &q : pts)
			if (q == p)
				return true;
		return false;
	};

	for (const auto &p1 : pts) {
		CHECK(is_on_curve(c, p1));
		CHECK(point_add(c, p1, CurvePoint::infinity()) == p1);
		CHECK(point_add(c, p1, point_negate(c, p1)).inf);
		CHECK(scalar_mul(c, 13, p1).inf); // q kills every point
		for (const auto &p2 : pts) {
			CurvePoint sum = point_add(c, p1, p2);
			CHECK(contains(sum)); // closure
			CHECK(sum == point_add(c, p2, p1));
		}
	}

	// associativity over all triples
	for (const auto &p1 : pts)
		for (const auto &p2 : pts)
			for (const auto &p3 : pts)
				CHECK(point_add(c, point_add(c, p1, p2), p3) ==
				      point_add(c, p1, point_add(c, p2, p3)));

	// scalar_mul against repeated addition
	CurvePoint acc = CurvePoint::infinity();
	for (int k = 0; k <= 14; k++) {
		CHECK(scalar_mul(c, k, c.g) == acc);
		acc = point_add(c, acc, c.g);
	}
}

TEST_CASE("named curves") {
	for (const char *name : {"P-256", "P-384"}) {
		const CurveParams &c = curve_by_name(name);
		CHECK(c.h == 1);
		CHECK(is_on_curve(c, c.g));
		CHECK_FALSE(c.g.inf);
		CHECK(scalar_mul(c, 0, c.g).inf);
		CHECK(scalar_mul(c, c.q, c.g).inf); // generator order
		CurvePoint g2 = scalar_mul(c, 2, c.g);
		CHECK(is_on_curve(c, g2));
		CHECK(g2 == point_add(c, c.g, c.g));
	}
	CHECK(p256().byte_len == 32);
	CHECK(p384().byte_len == 48);
	CHECK(p256().p % 4 == 3);
	CHECK(p384().p % 4 == 3);
	CHECK_THROWS_AS(curve_by_name("P-521"), std::invalid_argument);
}

TEST_CASE("byte conversions") {
	BigInt v("deadbeef", 16);
	Bytes b = bigint_to_fixed_bytes(v, 8);
	CHECK(to_hex(b) == "00000000deadbeef");
	CHECK(bigint_from_bytes(b) == v);
	CHECK(bigint_to_fixed_bytes(0, 4) == Bytes{0, 0, 0, 0});
	CHECK_THROWS_AS(bigint_to_fixed_bytes(v, 3), std::invalid_argument);
}

TEST_CASE("rand_below stays in range and covers it") {
	Rng rng(9);
	BigInt bound = 100;
	std::set<long> seen;
	for (int i = 0; i < 3000; i++) {
		BigInt v = rand_below(bound, rng);
		CHECK(v >= 0);
		CHECK(v < bound);
		seen.insert(v.get_si());
	}
	CHECK(seen.size() == 100);
}

#include "dflab/rng.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dflab {

static uint64_t splitmix64(uint64_t &x) {
	uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

static uint64_t rotl(uint64_t x, int k) {
	return (x << k) | (x >> (64 - k));
}

Rng::Rng(uint64_t seed) : seed_(seed) {
	init_state(seed);
}

void Rng::init_state(uint64_t seed) {
	uint64_t sm = seed;
	for (auto &w : s_)
		w = splitmix64(sm);
	// xoshiro must not start from the all-zero state
	if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0)
		s_[0] = 1;
}

Rng Rng::child(uint64_t id) const {
	uint64_t mix = seed_ ^ (0x6a09e667f3bcc909ULL + id * 0x9e3779b97f4a7c15ULL);
	uint64_t sm = mix;
	splitmix64(sm);
	return Rng(splitmix64(sm));
}

uint64_t Rng::next_u64() {
	uint64_t result = rotl(s_[1] * 5, 7) * 9;
	uint64_t t = s_[1] << 17;
	s_[2] ^= s_[0];
	s_[3] ^= s_[1];
	s_[1] ^= s_[2];
	s_[0] ^= s_[3];
	s_[2] ^= t;
	s_[3] = rotl(s_[3], 45);
	return result;
}

uint64_t Rng::below(uint64_t bound) {
	if (bound == 0)
		throw std::invalid_argument("Rng::below: bound must be positive");
	// rejection sampling to stay unbiased
	uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
	uint64_t v;
	do {
		v = next_u64();
	} while (v >= limit);
	return v % bound;
}

double Rng::real01() {
	return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Rng::chance(double p) {
	if (p <= 0.0)
		return false;
	if (p >= 1.0)
		return true;
	return real01() < p;
}

double Rng::normal() {
	if (have_spare_) {
		have_spare_ = false;
		return spare_normal_;
	}
	double u1, u2;
	do {
		u1 = real01();
	} while (u1 <= 0.0);
	u2 = real01();
	double r = std::sqrt(-2.0 * std::log(u1));
	spare_normal_ = r * std::sin(2.0 * M_PI * u2);
	have_spare_ = true;
	return r * std::cos(2.0 * M_PI * u2);
}

double Rng::lognormal(double median, double sigma) {
	if (median <= 0.0)
		throw std::invalid_argument("lognormal median must be positive");
	return std::exp(std::log(median) + sigma * normal());
}

void Rng::fill(std::span<uint8_t> out) {
	size_t i = 0;
	while (i < out.size()) {
		uint64_t v = next_u64();
		for (int b = 0; b < 8 && i < out.size(); b++, i++) {
			out[i] = static_cast<uint8_t>(v & 0xff);
			v >>= 8;
		}
	}
}

Bytes Rng::bytes(size_t n) {
	Bytes out(n);
	fill(out);
	return out;
}

uint64_t entropy_seed() {
	std::random_device rd;
	uint64_t hi = rd(), lo = rd();
	uint64_t t = static_cast<uint64_t>(
	    std::chrono::steady_clock::now().time_since_epoch().count());
	uint64_t x = (hi << 32) ^ lo ^ t;
	return splitmix64(x);
}

} // namespace dflab

#pragma once

#include <cstdint>
#include <span>

#include "dflab/bytes.hpp"

namespace dflab {

/**
 * Deterministic xoshiro256** generator with derivable child streams.
 *
 * Every randomized workflow takes an Rng handle so that a single master
 * seed replays an entire run. Child streams are a pure function of
 * (root seed, child id path), independent of how much the parent has
 * been consumed, which keeps parallel loops bitwise-reproducible: give
 * each loop index its own child and the schedule stops mattering.
 */
class Rng {
public:
	explicit Rng(uint64_t seed);

	// Stream for a sub-task. Does not consume parent state.
	Rng child(uint64_t id) const;

	uint64_t next_u64();
	// Uniform in [0, bound). bound = 0 is invalid.
	uint64_t below(uint64_t bound);
	// Uniform double in [0, 1).
	double real01();
	bool chance(double p);
	double normal();
	// exp(Normal(ln median, sigma)); median > 0.
	double lognormal(double median, double sigma);
	void fill(std::span<uint8_t> out);
	Bytes bytes(size_t n);

	uint64_t seed() const { return seed_; }

private:
	uint64_t seed_;
	uint64_t s_[4];
	double spare_normal_ = 0.0;
	bool have_spare_ = false;

	void init_state(uint64_t seed);
};

// Non-deterministic seed for runs where the user did not pin one.
uint64_t entropy_seed();

} // namespace dflab

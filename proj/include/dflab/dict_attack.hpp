#pragma once

#include <iosfwd>

#include "dflab/dragonfly_derive.hpp"

namespace dflab {

/**
 * One extracted fact: under these identities (or this EAP-pwd session
 * token) the victim's conversion succeeded at iteration k (Exact), or
 * needed more than k iterations (AtLeast).
 */
struct Leak {
	enum class Kind { Exact, AtLeast };
	Identity id_a;
	Identity id_b;
	std::optional<EapToken> token;
	int k = 0;
	Kind kind = Kind::Exact;
};

std::string leaks_to_jsonl(std::span<const Leak> leaks);
std::vector<Leak> leaks_from_jsonl(std::istream &in);

/**
 * Closed-form attack complexity model.
 *
 * Per-iteration success probability p_s defaults to exactly 1/2 (the
 * "approx" reading of q/(2p) for cofactor-1 curves). The iteration law
 * is Pr[X = k] = p_s^k as printed, which is a proper distribution only
 * at p_s = 1/2; normalized_geometric switches to
 * (1 - p_s)^(k-1) * p_s for other p_s values.
 */
struct AttackModel {
	double p_s = 0.5;
	int k_max = 20;
	bool normalized_geometric = false;

	// q / (2p) for the given curve
	static double p_success(const CurveParams &curve);

	// Pr[X = k]
	double pr_iteration(int k) const;
	// Probability that one random trace eliminates a wrong password:
	// sum over k of Pr[X = k] * (1 - Pr[X = k]).
	double pr_password_pruned_by_one_trace() const;
	// Eliminated within n traces: 1 - (1 - P1)^n.
	double pr_pruned_within(int n) const;
	// Binomial upper tail Pr[Z_n >= d] over a dictionary of size L,
	// computed in log space; d = L collapses to exp(L ln p). L may
	// exceed 2^53-scale integers, hence double.
	double pr_at_least_d_pruned(double L, double d, int n) const;
	// Minimal n with pr_at_least_d_pruned(L, d, n) >= target_prob.
	// d defaults to L ("eliminate all wrong passwords"); a
	// single-entry dictionary needs no pruning.
	long traces_required(double L, double target_prob = 0.95,
	                     std::optional<double> d = std::nullopt) const;
	// Alternative criterion: minimal n with expected survivors
	// L * (1 - P1)^n <= 1.
	long traces_required_expected_survivors(double L) const;

	// The single-bit baseline channel that leaks only the first
	// iteration's outcome: a wrong password passes one trace with
	// probability p_s^2 + (1-p_s)^2.
	double baseline_prune_prob_per_trace() const;
	long baseline_traces_required(double L, double target_prob = 0.95,
	                              std::optional<double> d = std::nullopt) const;
	long baseline_traces_required_expected_survivors(double L) const;
};

struct PruneOptions {
	Variant variant = Variant::Sae;
	const CurveParams *curve = nullptr; // default P-256
	int n_threads = 0;
};

struct PruneReport {
	size_t input_size = 0;
	std::vector<std::string> survivors;
	// eliminations attributed to the first mismatching leak, by index
	std::vector<size_t> eliminated_by_leak;
	double wall_clock_ms = 0; // informational; never serialized
};

// Re-derives every candidate under each leak's identities and drops it
// at the first inconsistency (Exact: success != k; AtLeast:
// success <= k). Work is split across candidates; survivor order is
// the input order regardless of thread count.
PruneReport prune_dictionary(const std::vector<std::string> &dictionary,
                             const std::vector<Leak> &leaks,
                             const PruneOptions &opts);
PruneReport prune_dictionary_serial(const std::vector<std::string> &dictionary,
                                    const std::vector<Leak> &leaks,
                                    const PruneOptions &opts);

// True when the candidate password matches every leak.
bool password_consistent_with_leaks(std::span<const uint8_t> password,
                                    const std::vector<Leak> &leaks,
                                    Variant variant, const CurveParams &curve);

} // namespace dflab

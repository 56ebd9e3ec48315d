#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>

#include "dflab/dragonfly_derive.hpp"

namespace dflab {

// One monitored cache-probe observation. delta is the recorded cycle
// count since the last *observed* synchronization-clock hit (the spy
// cannot see calls it missed); latency is the probe reload time,
// carried for format fidelity and unused by the parser.
struct ProbeEvent {
	enum class Label : uint8_t { SyncClock, RandomCall };
	Label label = Label::SyncClock;
	int64_t delta = 0;
	int latency = 0;
};

// "kdf_sha256" / "l_getrandom"
const char *probe_label_name(ProbeEvent::Label label);

// One monitored key exchange: preamble RNG draws from the per-session
// qr/qnr setup, then the conversion loop.
using Sample = std::vector<ProbeEvent>;

struct Trace {
	std::string trace_id;
	Identity id_a;
	Identity id_b;
	std::optional<EapToken> token; // EAP-pwd session token
	std::vector<Sample> samples;
	// simulator-only; stripped by serialization, scored via the
	// answers sidecar
	std::optional<int> ground_truth;
};

struct DelayDist {
	double median = 0;
	double sigma = 0;
};

struct SampleNoise {
	double clock_miss_prob = 0;
	double randomcall_miss_prob = 0;
	// probability a sample carries one extra long-delayed call at a
	// uniformly random iteration
	double spurious_long_delay_prob = 0;
	double malformed_sample_prob = 0;
	// probability the spy is descheduled across a whole iteration and
	// observes none of its events; surviving later events then count
	// one iteration short
	double iteration_blackout_prob = 0;
};

/**
 * Stochastic channel model. Per-sample event losses and spurious long
 * delays come from `base`, or from `degraded` for sessions hit by heavy
 * system noise (probability degraded_session_prob per trace). With
 * probability dead_session_prob the eviction that amplifies the
 * success-path delay fails for the whole session and no long-delay
 * event is ever recorded. long_delay must stochastically dominate
 * short_delay.
 */
struct NoiseModel {
	SampleNoise base;
	SampleNoise degraded;
	double degraded_session_prob = 0;
	double dead_session_prob = 0;
	DelayDist short_delay{220, 0.50};
	DelayDist long_delay{4000, 0.15};
	DelayDist iter_gap{4100, 0.22};  // first clock hit of an iteration
	DelayDist clock_gap{420, 0.30};  // further hits within an iteration
	int clocks_per_iter = 3;
	int preamble_events = 5;
	uint64_t seed = 0;

	void validate() const;

	static NoiseModel noiseless();
	// shipped defaults, fitted against the reliability anchor points
	static NoiseModel sae_default();
	static NoiseModel eap_default();
};

NoiseModel noise_model_by_name(std::string_view name);
std::string noise_to_json(const NoiseModel &m);
NoiseModel noise_from_json(const std::string &text);

// Session condition drawn once per trace.
struct SessionEnv {
	bool degraded = false;
	bool dead = false;
};
SessionEnv draw_session_env(const NoiseModel &m, Rng &rng);

/**
 * One observed key exchange. truth_k is where the success-specific
 * long-delay RNG call lands; total_iterations is how many loop passes
 * the victim executes (k_max for SAE, truth_k for early-exit EAP-pwd).
 */
Sample simulate_sample(int truth_k, int total_iterations, const NoiseModel &noise,
                       const SessionEnv &env, Rng &rng);

// Runs the real (vulnerable-mode) derivation for ground truth, then
// n_samples independent observations. Throws std::domain_error when
// the derivation finds no element (no leak is defined). EAP-pwd
// permits exactly one sample per trace.
Trace simulate_trace(const DerivationContext &ctx, int n_samples,
                     const NoiseModel &noise, Rng &rng);

// Same channel, synthetic ground truth; used by calibration and
// noiseless-completeness corpora where truth must span a given range.
Trace simulate_trace_synthetic(int truth_k, Variant variant, int k_max,
                               int n_samples, const NoiseModel &noise, Rng &rng);

// Independent traces, one rng stream per trace. OpenMP; identical
// output to the serial reference.
std::vector<Trace> simulate_trace_batch(const std::vector<DerivationContext> &ctxs,
                                        int n_samples, const NoiseModel &noise,
                                        const Rng &master, int n_threads = 0);
std::vector<Trace> simulate_trace_batch_serial(
    const std::vector<DerivationContext> &ctxs, int n_samples,
    const NoiseModel &noise, const Rng &master);

struct TraceFormatError : std::runtime_error {
	size_t line;
	TraceFormatError(size_t line_no, const std::string &msg)
	    : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
	      line(line_no) {}
};

/**
 * Text form, one trace per stream:
 *   # trace id=<id> idA=<hex> idB=<hex> [token=<hex>]
 *   <label> <delta> (<latency>)
 *   ...
 * Blank lines separate samples; '#' lines are comments ("# trace" meta
 * is recovered when present); a bare "..." marks a truncated capture
 * and is skipped. Ground truth is never serialized.
 */
std::string serialize_trace(const Trace &trace);
Trace parse_trace_text(const std::string &text);

// JSON-lines form: one sample per line, events as [label, delta,
// latency] arrays; traces grouped by trace_id (consecutive lines).
std::string traces_to_jsonl(std::span<const Trace> traces);
std::vector<Trace> traces_from_jsonl(std::istream &in);

// {"trace_id": ..., "truth_k": ...} per line
std::string answers_jsonl(std::span<const Trace> traces);

} // namespace dflab

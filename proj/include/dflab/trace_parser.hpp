#pragma once

#include "dflab/sidechannel_sim.hpp"

namespace dflab {

struct ParserConfig {
	// a RandomCall delay at or above this is treated as the amplified
	// success-path call and stops the sample scan
	int64_t long_delay_threshold = 1500;
	size_t min_well_formed_events = 6;
	// the top iteration score must exceed the runner-up by this factor
	// for a confident answer; calibrated jointly with the default
	// noise model so noiseless corpora are never ambiguous and noisy
	// ones land in the shipped reliability bands
	double decision_margin = 1.6;
	int max_iterations = 20;
	// clock hits closer than this collapse into one iteration
	// boundary; unset = estimated per sample as
	// median(inter-iteration clock gaps) / refractory_divisor, where
	// gaps at or above long_delay_threshold count as inter-iteration
	std::optional<int64_t> refractory_window;
	double refractory_divisor = 3.0;
};

enum class WarningReason { NoUsableSamples, NoDelayEvidence, Ambiguous };
const char *warning_reason_name(WarningReason r);

struct SampleDiagnostics {
	bool kept = false;
	// iteration where a long delay stopped the scan; 0 = ran through
	int early_stop_iteration = 0;
};

struct ParseOutcome {
	enum class Kind { Exact, LowerBound, Warning };
	Kind kind = Kind::Warning;
	int k = 0;                   // Exact
	int k_min = 0;               // LowerBound: more than k_min iterations
	std::vector<int> candidates; // LowerBound: the tied pair
	WarningReason reason = WarningReason::NoUsableSamples;
	std::vector<double> scores; // aggregated, index 1..max_iterations
	std::vector<SampleDiagnostics> diagnostics;

	bool is_exact() const { return kind == Kind::Exact; }
};

bool sample_well_formed(const Sample &sample, const ParserConfig &cfg);
// Indices of samples that survive the noise filter: present preamble,
// at least one clock hit, enough events overall.
std::vector<size_t> filter_samples(const std::vector<Sample> &samples,
                                   const ParserConfig &cfg);

// Per-iteration delay evidence for one sample: clock hits advance the
// iteration counter (collapsing bursts within the refractory window),
// every other line adds its delay to the current iteration's score,
// and a long enough delay ends the scan.
std::vector<double> score_sample(const Sample &sample, const ParserConfig &cfg,
                                 SampleDiagnostics *diag = nullptr);

// Sums sample scores and decides: Exact when the margin holds,
// LowerBound when two adjacent iterations tie, Warning otherwise.
ParseOutcome interpret_trace(const Trace &trace, const ParserConfig &cfg);

std::string outcome_to_json(const std::string &trace_id, const ParseOutcome &o);

// ---- channel calibration against reliability targets ----

struct CalibrationTarget {
	int samples_per_trace = 1;
	double accuracy = 0;
	double usable = 0;
};

// The shipped reliability anchors: (1, 66%, 70.5%), (5, 92%, 77%),
// (10, 97%, 88%).
const std::vector<CalibrationTarget> &default_calibration_targets();

struct CalibrationMetrics {
	double accuracy = 0; // correct / exact outcomes
	double usable = 0;   // exact outcomes / traces
};

// Monte Carlo of the full channel + parser pipeline. Ground truth is
// drawn from the natural (geometric, capped) iteration distribution.
CalibrationMetrics evaluate_noise(const NoiseModel &noise, Variant variant,
                                  int k_max, int samples_per_trace, int n_traces,
                                  const ParserConfig &cfg, const Rng &master,
                                  int n_threads = 0);

struct CalibrationResult {
	NoiseModel model;
	double distance = 0; // summed |measured - target| in fraction points
	std::vector<CalibrationMetrics> measured;
	bool within_tolerance = false;
};

// Coordinate-descent search over the noise probabilities so the parser
// reliability curve lands on the targets. Returns the best model found
// with its distances; tolerance_pts is the per-metric acceptance band.
CalibrationResult calibrate(const NoiseModel &start,
                            const std::vector<CalibrationTarget> &targets,
                            double tolerance_pts, int n_traces, int rounds,
                            const ParserConfig &cfg, const Rng &master);

} // namespace dflab

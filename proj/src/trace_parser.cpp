#include "dflab/trace_parser.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>

namespace dflab {

using nlohmann::json;

const char *warning_reason_name(WarningReason r) {
	switch (r) {
	case WarningReason::NoUsableSamples: return "no-usable-samples";
	case WarningReason::NoDelayEvidence: return "no-delay-evidence";
	case WarningReason::Ambiguous: return "ambiguous";
	}
	return "unknown";
}

bool sample_well_formed(const Sample &sample, const ParserConfig &cfg) {
	if (sample.size() < cfg.min_well_formed_events)
		return false;
	// the qr/qnr setup draws must be visible before the loop starts
	if (sample.front().label != ProbeEvent::Label::RandomCall)
		return false;
	bool has_clock = std::any_of(sample.begin(), sample.end(), [](const ProbeEvent &e) {
		return e.label == ProbeEvent::Label::SyncClock;
	});
	return has_clock;
}

std::vector<size_t> filter_samples(const std::vector<Sample> &samples,
                                   const ParserConfig &cfg) {
	std::vector<size_t> kept;
	for (size_t i = 0; i < samples.size(); i++) {
		if (sample_well_formed(samples[i], cfg))
			kept.push_back(i);
	}
	return kept;
}

// Collapse window for clock bursts. Clock gaps at or above the long
// delay threshold are iteration boundaries (the success delay fits
// inside one iteration, so the loop period must exceed it); the window
// is a third of their median. A sample whose clocks never spread that
// far is a single-iteration capture.
static int64_t refractory_window(const Sample &sample, const ParserConfig &cfg) {
	if (cfg.refractory_window)
		return *cfg.refractory_window;
	std::vector<int64_t> gaps;
	bool first = true;
	for (const ProbeEvent &e : sample) {
		if (e.label != ProbeEvent::Label::SyncClock)
			continue;
		if (first) {
			first = false; // process-start offset, not a loop gap
			continue;
		}
		if (e.delta >= cfg.long_delay_threshold)
			gaps.push_back(e.delta);
	}
	if (gaps.empty())
		return std::numeric_limits<int64_t>::max();
	std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
	int64_t median = gaps[gaps.size() / 2];
	return static_cast<int64_t>(static_cast<double>(median) / cfg.refractory_divisor);
}

std::vector<double> score_sample(const Sample &sample, const ParserConfig &cfg,
                                 SampleDiagnostics *diag) {
	std::vector<double> scores(static_cast<size_t>(cfg.max_iterations) + 1, 0.0);
	int64_t window = refractory_window(sample, cfg);
	int cur_iter = 0;
	for (const ProbeEvent &e : sample) {
		if (e.label == ProbeEvent::Label::SyncClock) {
			if (cur_iter == 0)
				cur_iter = 1; // the loop begins
			else if (e.delta >= window)
				cur_iter++;
			if (cur_iter > cfg.max_iterations)
				break;
		} else {
			if (cur_iter == 0)
				continue; // preamble draw, ignored
			scores[static_cast<size_t>(cur_iter)] += static_cast<double>(e.delta);
			if (e.delta >= cfg.long_delay_threshold) {
				if (diag)
					diag->early_stop_iteration = cur_iter;
				break;
			}
		}
	}
	return scores;
}

ParseOutcome interpret_trace(const Trace &trace, const ParserConfig &cfg) {
	ParseOutcome out;
	out.diagnostics.resize(trace.samples.size());
	out.scores.assign(static_cast<size_t>(cfg.max_iterations) + 1, 0.0);

	std::vector<size_t> kept = filter_samples(trace.samples, cfg);
	for (size_t i : kept)
		out.diagnostics[i].kept = true;
	if (kept.empty()) {
		out.kind = ParseOutcome::Kind::Warning;
		out.reason = WarningReason::NoUsableSamples;
		return out;
	}
	for (size_t i : kept) {
		std::vector<double> s =
		    score_sample(trace.samples[i], cfg, &out.diagnostics[i]);
		for (size_t k = 0; k < s.size(); k++)
			out.scores[k] += s[k];
	}

	int top = 1, runner = 0;
	for (int k = 1; k <= cfg.max_iterations; k++) {
		if (out.scores[static_cast<size_t>(k)] >
		    out.scores[static_cast<size_t>(top)])
			top = k;
	}
	for (int k = 1; k <= cfg.max_iterations; k++) {
		if (k == top)
			continue;
		if (runner == 0 || out.scores[static_cast<size_t>(k)] >
		                       out.scores[static_cast<size_t>(runner)])
			runner = k;
	}
	double top_score = out.scores[static_cast<size_t>(top)];
	double runner_score = runner ? out.scores[static_cast<size_t>(runner)] : 0.0;

	if (top_score <= 0.0) {
		out.kind = ParseOutcome::Kind::Warning;
		out.reason = WarningReason::NoDelayEvidence;
		return out;
	}
	if (top_score >= cfg.decision_margin * runner_score) {
		out.kind = ParseOutcome::Kind::Exact;
		out.k = top;
		return out;
	}
	if (std::abs(top - runner) == 1) {
		// two adjacent values compete: at least j - 1 iterations hold
		int j = std::min(top, runner);
		out.kind = ParseOutcome::Kind::LowerBound;
		out.k_min = j - 1;
		out.candidates = {j, j + 1};
		return out;
	}
	out.kind = ParseOutcome::Kind::Warning;
	out.reason = WarningReason::Ambiguous;
	return out;
}

std::string outcome_to_json(const std::string &trace_id, const ParseOutcome &o) {
	json j{{"trace_id", trace_id}};
	switch (o.kind) {
	case ParseOutcome::Kind::Exact:
		j["kind"] = "exact";
		j["k"] = o.k;
		break;
	case ParseOutcome::Kind::LowerBound:
		j["kind"] = "lower_bound";
		j["k_min"] = o.k_min;
		j["candidates"] = o.candidates;
		break;
	case ParseOutcome::Kind::Warning:
		j["kind"] = "warning";
		j["reason"] = warning_reason_name(o.reason);
		break;
	}
	return j.dump();
}

const std::vector<CalibrationTarget> &default_calibration_targets() {
	static const std::vector<CalibrationTarget> targets = {
	    {1, 0.66, 0.705},
	    {5, 0.92, 0.77},
	    {10, 0.97, 0.88},
	};
	return targets;
}

// Natural success-iteration distribution of the channel: geometric
// with rate 1/2, conditioned on landing within the loop cap.
static int draw_natural_truth(int k_max, Rng &rng) {
	for (;;) {
		for (int k = 1; k <= k_max; k++) {
			if (rng.chance(0.5))
				return k;
		}
		// fell past the cap; resample
	}
}

CalibrationMetrics evaluate_noise(const NoiseModel &noise, Variant variant,
                                  int k_max, int samples_per_trace, int n_traces,
                                  const ParserConfig &cfg, const Rng &master,
                                  int n_threads) {
	std::vector<int> correct(static_cast<size_t>(n_traces), 0);
	std::vector<int> exact(static_cast<size_t>(n_traces), 0);
#pragma omp parallel for schedule(dynamic, 32) \
    num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
	for (long i = 0; i < n_traces; i++) {
		Rng rng = master.child(static_cast<uint64_t>(i));
		Rng truth_rng = rng.child(0);
		int truth = draw_natural_truth(k_max, truth_rng);
		Rng sim_rng = rng.child(1);
		Trace t = simulate_trace_synthetic(truth, variant, k_max,
		                                   samples_per_trace, noise, sim_rng);
		ParseOutcome o = interpret_trace(t, cfg);
		if (o.is_exact()) {
			exact[static_cast<size_t>(i)] = 1;
			correct[static_cast<size_t>(i)] = o.k == truth ? 1 : 0;
		}
	}
	long n_exact = 0, n_correct = 0;
	for (long i = 0; i < n_traces; i++) {
		n_exact += exact[static_cast<size_t>(i)];
		n_correct += correct[static_cast<size_t>(i)];
	}
	CalibrationMetrics m;
	m.usable = n_traces > 0 ? static_cast<double>(n_exact) / n_traces : 0.0;
	m.accuracy = n_exact > 0 ? static_cast<double>(n_correct) / n_exact : 0.0;
	return m;
}

static double score_model(const NoiseModel &noise,
                          const std::vector<CalibrationTarget> &targets,
                          int n_traces, const ParserConfig &cfg, const Rng &master,
                          std::vector<CalibrationMetrics> *out_measured) {
	double dist = 0;
	if (out_measured)
		out_measured->clear();
	for (size_t t = 0; t < targets.size(); t++) {
		CalibrationMetrics m =
		    evaluate_noise(noise, Variant::Sae, 20, targets[t].samples_per_trace,
		                   n_traces, cfg, master.child(t));
		dist += std::abs(m.accuracy - targets[t].accuracy) +
		        std::abs(m.usable - targets[t].usable);
		if (out_measured)
			out_measured->push_back(m);
	}
	return dist;
}

CalibrationResult calibrate(const NoiseModel &start,
                            const std::vector<CalibrationTarget> &targets,
                            double tolerance_pts, int n_traces, int rounds,
                            const ParserConfig &cfg, const Rng &master) {
	NoiseModel best = start;
	best.validate();
	double best_dist = score_model(best, targets, n_traces, cfg, master, nullptr);

	auto tunables = [](NoiseModel &m) {
		return std::vector<double *>{
		    &m.base.clock_miss_prob, &m.base.randomcall_miss_prob,
		    &m.base.spurious_long_delay_prob, &m.base.malformed_sample_prob,
		    &m.base.iteration_blackout_prob, &m.degraded.clock_miss_prob,
		    &m.degraded.randomcall_miss_prob,
		    &m.degraded.spurious_long_delay_prob,
		    &m.degraded.malformed_sample_prob,
		    &m.degraded.iteration_blackout_prob, &m.degraded_session_prob,
		    &m.dead_session_prob};
	};

	for (int round = 0; round < rounds; round++) {
		bool improved = false;
		size_t n_params = tunables(best).size();
		for (size_t pi = 0; pi < n_params; pi++) {
			for (double factor : {0.8, 1.25}) {
				NoiseModel trial = best;
				double *param = tunables(trial)[pi];
				*param = std::clamp(*param * factor, 0.0, 0.98);
				double d =
				    score_model(trial, targets, n_traces, cfg, master, nullptr);
				if (d < best_dist) {
					best = trial;
					best_dist = d;
					improved = true;
				}
			}
		}
		if (!improved)
			break;
	}

	CalibrationResult result;
	result.model = best;
	result.distance =
	    score_model(best, targets, n_traces, cfg, master, &result.measured);
	result.within_tolerance = true;
	for (size_t t = 0; t < targets.size(); t++) {
		double tol = tolerance_pts / 100.0;
		if (std::abs(result.measured[t].accuracy - targets[t].accuracy) > tol ||
		    std::abs(result.measured[t].usable - targets[t].usable) > tol)
			result.within_tolerance = false;
	}
	return result;
}

} // namespace dflab

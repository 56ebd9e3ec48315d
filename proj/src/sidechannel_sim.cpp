#include "dflab/sidechannel_sim.hpp"

#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <istream>
#include <sstream>

namespace dflab {

using nlohmann::json;

const char *probe_label_name(ProbeEvent::Label label) {
	return label == ProbeEvent::Label::SyncClock ? "kdf_sha256" : "l_getrandom";
}

void NoiseModel::validate() const {
	auto check_probs = [](const SampleNoise &s) {
		for (double p : {s.clock_miss_prob, s.randomcall_miss_prob,
		                 s.spurious_long_delay_prob, s.malformed_sample_prob,
		                 s.iteration_blackout_prob}) {
			if (p < 0.0 || p > 1.0)
				throw std::invalid_argument("noise probability out of [0,1]");
		}
	};
	check_probs(base);
	check_probs(degraded);
	if (degraded_session_prob < 0 || degraded_session_prob > 1 ||
	    dead_session_prob < 0 || dead_session_prob > 1)
		throw std::invalid_argument("session probability out of [0,1]");
	if (long_delay.median <= short_delay.median)
		throw std::invalid_argument(
		    "long_delay must stochastically dominate short_delay");
	if (clocks_per_iter < 1 || preamble_events < 1)
		throw std::invalid_argument("clocks_per_iter and preamble_events must be >= 1");
}

NoiseModel NoiseModel::noiseless() {
	// an ideal channel: every call observed, dispersions tight enough
	// that iteration boundaries can never be confused
	NoiseModel m;
	m.short_delay = {220, 0.10};
	m.long_delay = {4000, 0.05};
	m.iter_gap = {4100, 0.08};
	m.clock_gap = {420, 0.08};
	return m;
}

// Fitted against the reliability anchors (accuracy/usable-traces at 1,
// 5 and 10 samples per trace) by the calibrate() search; see
// default_calibration_targets().
NoiseModel NoiseModel::sae_default() {
	NoiseModel m;
	m.base = SampleNoise{0.07, 0.30, 0.70, 0.19, 0.035};
	m.degraded = SampleNoise{0.30, 0.34, 0.39, 0.30, 0.21};
	m.degraded_session_prob = 0.06;
	m.dead_session_prob = 0.03;
	return m;
}

// Single-measurement channel: errors are dominated by whole-iteration
// blackouts that shift the guess one short, so softening the guess to
// {x, x+1} recovers most of them.
NoiseModel NoiseModel::eap_default() {
	NoiseModel m;
	m.base = SampleNoise{0.08, 0.002, 0.006, 0.002, 0.022};
	m.degraded = m.base;
	m.degraded_session_prob = 0.0;
	m.dead_session_prob = 0.001;
	return m;
}

NoiseModel noise_model_by_name(std::string_view name) {
	if (name == "noiseless")
		return NoiseModel::noiseless();
	if (name == "default" || name == "sae-default")
		return NoiseModel::sae_default();
	if (name == "eap-default")
		return NoiseModel::eap_default();
	throw std::invalid_argument("unknown noise model: " + std::string(name));
}

static json noise_part(const SampleNoise &s) {
	return json{{"clock_miss_prob", s.clock_miss_prob},
	            {"randomcall_miss_prob", s.randomcall_miss_prob},
	            {"spurious_long_delay_prob", s.spurious_long_delay_prob},
	            {"malformed_sample_prob", s.malformed_sample_prob},
	            {"iteration_blackout_prob", s.iteration_blackout_prob}};
}

static SampleNoise noise_part_from(const json &j) {
	SampleNoise s;
	s.clock_miss_prob = j.at("clock_miss_prob").get<double>();
	s.randomcall_miss_prob = j.at("randomcall_miss_prob").get<double>();
	s.spurious_long_delay_prob = j.at("spurious_long_delay_prob").get<double>();
	s.malformed_sample_prob = j.at("malformed_sample_prob").get<double>();
	s.iteration_blackout_prob = j.value("iteration_blackout_prob", 0.0);
	return s;
}

static json dist_part(const DelayDist &d) {
	return json{{"median", d.median}, {"sigma", d.sigma}};
}

static DelayDist dist_part_from(const json &j) {
	return DelayDist{j.at("median").get<double>(), j.at("sigma").get<double>()};
}

std::string noise_to_json(const NoiseModel &m) {
	json j{{"base", noise_part(m.base)},
	       {"degraded", noise_part(m.degraded)},
	       {"degraded_session_prob", m.degraded_session_prob},
	       {"dead_session_prob", m.dead_session_prob},
	       {"short_delay", dist_part(m.short_delay)},
	       {"long_delay", dist_part(m.long_delay)},
	       {"iter_gap", dist_part(m.iter_gap)},
	       {"clock_gap", dist_part(m.clock_gap)},
	       {"clocks_per_iter", m.clocks_per_iter},
	       {"preamble_events", m.preamble_events},
	       {"seed", m.seed}};
	return j.dump(2);
}

NoiseModel noise_from_json(const std::string &text) {
	json j = json::parse(text);
	NoiseModel m;
	m.base = noise_part_from(j.at("base"));
	m.degraded = noise_part_from(j.at("degraded"));
	m.degraded_session_prob = j.at("degraded_session_prob").get<double>();
	m.dead_session_prob = j.at("dead_session_prob").get<double>();
	m.short_delay = dist_part_from(j.at("short_delay"));
	m.long_delay = dist_part_from(j.at("long_delay"));
	m.iter_gap = dist_part_from(j.at("iter_gap"));
	m.clock_gap = dist_part_from(j.at("clock_gap"));
	m.clocks_per_iter = j.at("clocks_per_iter").get<int>();
	m.preamble_events = j.at("preamble_events").get<int>();
	m.seed = j.value("seed", uint64_t{0});
	m.validate();
	return m;
}

SessionEnv draw_session_env(const NoiseModel &m, Rng &rng) {
	SessionEnv env;
	env.dead = rng.chance(m.dead_session_prob);
	env.degraded = rng.chance(m.degraded_session_prob);
	return env;
}

static int64_t draw_delay(const DelayDist &d, Rng &rng) {
	return std::llround(rng.lognormal(d.median, d.sigma));
}

static int draw_latency(Rng &rng) {
	return 80 + static_cast<int>(rng.below(21));
}

static void make_malformed(Sample &sample, Rng &rng) {
	switch (rng.below(4)) {
	case 0: { // preamble lost: drop leading RNG draws
		size_t i = 0;
		while (i < sample.size() &&
		       sample[i].label == ProbeEvent::Label::RandomCall)
			i++;
		sample.erase(sample.begin(), sample.begin() + static_cast<long>(i));
		break;
	}
	case 1: // clock line never observed
		std::erase_if(sample, [](const ProbeEvent &e) {
			return e.label == ProbeEvent::Label::SyncClock;
		});
		break;
	case 2: // capture cut off almost immediately
		sample.resize(std::min<size_t>(sample.size(), 3));
		break;
	default:
		sample.clear();
		break;
	}
}

Sample simulate_sample(int truth_k, int total_iterations, const NoiseModel &noise,
                       const SessionEnv &env, Rng &rng) {
	if (truth_k < 1 || total_iterations < truth_k)
		throw std::invalid_argument("simulate_sample: bad iteration counts");
	noise.validate();
	const SampleNoise &sn = env.degraded ? noise.degraded : noise.base;

	Sample sample;
	// The spy records delays against the last clock hit it observed;
	// before the loop there is none, so the preamble carries large
	// process-start offsets.
	double t = 5.4e6 + rng.lognormal(3.0e4, 0.3);
	double last_clock_seen = 0.0;
	for (int i = 0; i < noise.preamble_events; i++) {
		t += draw_delay(noise.iter_gap, rng);
		if (!rng.chance(sn.randomcall_miss_prob))
			sample.push_back({ProbeEvent::Label::RandomCall,
			                  static_cast<int64_t>(t - last_clock_seen),
			                  draw_latency(rng)});
	}

	// At most one major disturbance per exchange, landing at a uniform
	// position: prefetcher or scheduler noise amplified into one extra
	// long-delayed call somewhere in the capture.
	int spurious_iter = 0;
	if (rng.chance(sn.spurious_long_delay_prob))
		spurious_iter = 1 + static_cast<int>(rng.below(
		                        static_cast<uint64_t>(total_iterations)));

	for (int iter = 1; iter <= total_iterations; iter++) {
		// a descheduled spy sees nothing for the whole iteration;
		// time keeps running, so the next observed clock carries the
		// accumulated gap and later events index one iteration short
		bool blackout = rng.chance(sn.iteration_blackout_prob);
		for (int c = 0; c < noise.clocks_per_iter; c++) {
			t += draw_delay(c == 0 ? noise.iter_gap : noise.clock_gap, rng);
			if (!blackout && !rng.chance(sn.clock_miss_prob)) {
				sample.push_back({ProbeEvent::Label::SyncClock,
				                  static_cast<int64_t>(t - last_clock_seen),
				                  draw_latency(rng)});
				last_clock_seen = t;
			}
		}
		// blinding draw inside the residue test
		double t_draw = t + draw_delay(noise.short_delay, rng);
		if (!blackout && !rng.chance(sn.randomcall_miss_prob))
			sample.push_back({ProbeEvent::Label::RandomCall,
			                  static_cast<int64_t>(t_draw - last_clock_seen),
			                  draw_latency(rng)});
		if (iter == spurious_iter && !blackout && !env.dead) {
			double t_sp = t + draw_delay(noise.long_delay, rng);
			sample.push_back({ProbeEvent::Label::RandomCall,
			                  static_cast<int64_t>(t_sp - last_clock_seen),
			                  draw_latency(rng)});
		}
		if (iter == truth_k && !env.dead &&
		    !rng.chance(sn.randomcall_miss_prob)) {
			// success-specific call; the eviction stretches it far
			// enough to outlive a blackout, so it stays visible and
			// only its iteration index can shift
			double t_succ = t + draw_delay(noise.long_delay, rng);
			sample.push_back({ProbeEvent::Label::RandomCall,
			                  static_cast<int64_t>(t_succ - last_clock_seen),
			                  draw_latency(rng)});
		}
	}

	if (rng.chance(sn.malformed_sample_prob))
		make_malformed(sample, rng);
	return sample;
}

static Trace build_trace(int truth_k, Variant variant, int k_max, int n_samples,
                         const NoiseModel &noise, Rng &rng) {
	if (n_samples < 1)
		throw std::invalid_argument("n_samples must be >= 1");
	if (variant == Variant::EapPwd && n_samples != 1)
		throw std::invalid_argument(
		    "EAP-pwd sessions yield exactly one sample per trace");
	int total = variant == Variant::Sae ? k_max : truth_k;

	Trace trace;
	trace.ground_truth = truth_k;
	Rng env_rng = rng.child(1);
	SessionEnv env = draw_session_env(noise, env_rng);
	for (int s = 0; s < n_samples; s++) {
		Rng srng = rng.child(2 + static_cast<uint64_t>(s));
		trace.samples.push_back(
		    simulate_sample(truth_k, total, noise, env, srng));
	}
	return trace;
}

Trace simulate_trace(const DerivationContext &ctx, int n_samples,
                     const NoiseModel &noise, Rng &rng) {
	Rng drng = rng.child(0);
	DerivationResult der = derive_pwe(ctx, drng);
	if (!der.success_iteration)
		throw std::domain_error(
		    "derivation found no element within the iteration limit; "
		    "no leak is defined");
	Trace trace = build_trace(*der.success_iteration, ctx.variant, ctx.k_max,
	                          n_samples, noise, rng);
	trace.id_a = ctx.id_a;
	trace.id_b = ctx.id_b;
	if (ctx.variant == Variant::EapPwd)
		trace.token = ctx.token;
	return trace;
}

Trace simulate_trace_synthetic(int truth_k, Variant variant, int k_max,
                               int n_samples, const NoiseModel &noise, Rng &rng) {
	return build_trace(truth_k, variant, k_max, n_samples, noise, rng);
}

std::vector<Trace> simulate_trace_batch_serial(
    const std::vector<DerivationContext> &ctxs, int n_samples,
    const NoiseModel &noise, const Rng &master) {
	std::vector<Trace> out(ctxs.size());
	for (size_t i = 0; i < ctxs.size(); i++) {
		Rng rng = master.child(i);
		out[i] = simulate_trace(ctxs[i], n_samples, noise, rng);
		out[i].trace_id = "t" + std::to_string(i);
	}
	return out;
}

std::vector<Trace> simulate_trace_batch(const std::vector<DerivationContext> &ctxs,
                                        int n_samples, const NoiseModel &noise,
                                        const Rng &master, int n_threads) {
	std::vector<Trace> out(ctxs.size());
	long n = static_cast<long>(ctxs.size());
#pragma omp parallel for schedule(dynamic, 8) \
    num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
	for (long i = 0; i < n; i++) {
		Rng rng = master.child(static_cast<uint64_t>(i));
		out[i] = simulate_trace(ctxs[i], n_samples, noise, rng);
		out[i].trace_id = "t" + std::to_string(i);
	}
	return out;
}

std::string serialize_trace(const Trace &trace) {
	std::ostringstream out;
	out << "# trace id=" << trace.trace_id << " idA=" << trace.id_a.display()
	    << " idB=" << trace.id_b.display();
	if (trace.token)
		out << " token=" << to_hex(*trace.token);
	out << "\n";
	bool first = true;
	for (const Sample &sample : trace.samples) {
		if (!first)
			out << "\n";
		first = false;
		for (const ProbeEvent &e : sample)
			out << probe_label_name(e.label) << " " << e.delta << " ("
			    << e.latency << ")\n";
	}
	return out.str();
}

static Identity identity_from_hex(const std::string &hex) {
	Bytes raw = from_hex(hex);
	if (raw.size() == 6)
		return Identity::mac(raw);
	return Identity::opaque(std::move(raw));
}

static void parse_meta(const std::string &line, Trace &trace) {
	std::istringstream in(line);
	std::string tok;
	in >> tok >> tok; // "#", "trace"
	while (in >> tok) {
		auto eq = tok.find('=');
		if (eq == std::string::npos)
			continue;
		std::string key = tok.substr(0, eq);
		std::string val = tok.substr(eq + 1);
		if (key == "id") {
			trace.trace_id = val;
		} else if (key == "idA") {
			trace.id_a = identity_from_hex(val);
		} else if (key == "idB") {
			trace.id_b = identity_from_hex(val);
		} else if (key == "token") {
			Bytes raw = from_hex(val);
			if (raw.size() == 4) {
				EapToken t;
				std::copy(raw.begin(), raw.end(), t.begin());
				trace.token = t;
			}
		}
	}
}

static std::string_view trim(std::string_view s) {
	while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
		s.remove_suffix(1);
	while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
		s.remove_prefix(1);
	return s;
}

Trace parse_trace_text(const std::string &text) {
	Trace trace;
	Sample current;
	std::istringstream in(text);
	std::string raw;
	size_t line_no = 0;
	bool meta_seen = false;

	auto flush = [&] {
		if (!current.empty()) {
			trace.samples.push_back(std::move(current));
			current.clear();
		}
	};

	while (std::getline(in, raw)) {
		line_no++;
		std::string_view line = trim(raw);
		if (line.empty()) {
			flush();
			continue;
		}
		if (line[0] == '#') {
			if (!meta_seen && line.rfind("# trace", 0) == 0) {
				parse_meta(std::string(line), trace);
				meta_seen = true;
			}
			continue;
		}
		if (line == "...") // truncated capture marker
			continue;

		std::istringstream ls{std::string(line)};
		std::string label;
		int64_t delta = 0;
		std::string latency_tok;
		if (!(ls >> label >> delta >> latency_tok))
			throw TraceFormatError(line_no, "expected '<label> <delta> (<latency>)'");
		ProbeEvent ev;
		if (label == "kdf_sha256")
			ev.label = ProbeEvent::Label::SyncClock;
		else if (label == "l_getrandom")
			ev.label = ProbeEvent::Label::RandomCall;
		else
			throw TraceFormatError(line_no, "unknown label '" + label + "'");
		if (delta < 0)
			throw TraceFormatError(line_no, "negative delta");
		if (latency_tok.size() < 3 || latency_tok.front() != '(' ||
		    latency_tok.back() != ')')
			throw TraceFormatError(line_no, "malformed latency field");
		try {
			ev.latency = std::stoi(latency_tok.substr(1, latency_tok.size() - 2));
		} catch (const std::exception &) {
			throw TraceFormatError(line_no, "malformed latency field");
		}
		ev.delta = delta;
		current.push_back(ev);
	}
	flush();
	return trace;
}

static json sample_to_json(const Sample &sample) {
	json events = json::array();
	for (const ProbeEvent &e : sample)
		events.push_back(json::array({probe_label_name(e.label), e.delta, e.latency}));
	return events;
}

std::string traces_to_jsonl(std::span<const Trace> traces) {
	std::ostringstream out;
	for (const Trace &t : traces) {
		for (const Sample &sample : t.samples) {
			json j{{"trace_id", t.trace_id},
			       {"idA", t.id_a.display()},
			       {"idB", t.id_b.display()},
			       {"events", sample_to_json(sample)}};
			if (t.token)
				j["token"] = to_hex(*t.token);
			out << j.dump() << "\n";
		}
	}
	return out.str();
}

std::vector<Trace> traces_from_jsonl(std::istream &in) {
	std::vector<Trace> traces;
	std::string line;
	size_t line_no = 0;
	while (std::getline(in, line)) {
		line_no++;
		if (trim(line).empty())
			continue;
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error &e) {
			throw TraceFormatError(line_no, e.what());
		}
		std::string id = j.value("trace_id", "");
		if (traces.empty() || traces.back().trace_id != id) {
			Trace t;
			t.trace_id = id;
			if (j.contains("idA"))
				t.id_a = identity_from_hex(j.at("idA").get<std::string>());
			if (j.contains("idB"))
				t.id_b = identity_from_hex(j.at("idB").get<std::string>());
			if (j.contains("token")) {
				Bytes raw = from_hex(j.at("token").get<std::string>());
				if (raw.size() == 4) {
					EapToken tok;
					std::copy(raw.begin(), raw.end(), tok.begin());
					t.token = tok;
				}
			}
			traces.push_back(std::move(t));
		}
		Sample sample;
		for (const auto &ev : j.at("events")) {
			if (!ev.is_array() || ev.size() != 3)
				throw TraceFormatError(line_no, "event must be [label, delta, latency]");
			std::string label = ev[0].get<std::string>();
			ProbeEvent e;
			if (label == "kdf_sha256")
				e.label = ProbeEvent::Label::SyncClock;
			else if (label == "l_getrandom")
				e.label = ProbeEvent::Label::RandomCall;
			else
				throw TraceFormatError(line_no, "unknown label '" + label + "'");
			e.delta = ev[1].get<int64_t>();
			e.latency = ev[2].get<int>();
			sample.push_back(e);
		}
		traces.back().samples.push_back(std::move(sample));
	}
	return traces;
}

std::string answers_jsonl(std::span<const Trace> traces) {
	std::ostringstream out;
	for (const Trace &t : traces) {
		if (!t.ground_truth)
			continue;
		json j{{"trace_id", t.trace_id}, {"truth_k", *t.ground_truth}};
		out << j.dump() << "\n";
	}
	return out.str();
}

} // namespace dflab

// dflab: Dragonfly password-to-curve laboratory.
//
// One multitool binary: derivation, handshake demo, side-channel trace
// simulation, trace parsing, dictionary pruning, attack planning,
// channel calibration, mitigation benchmarking, and the end-to-end
// campaign driver.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 domain failure
// (conversion found no element, no usable traces, ...).

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dflab/campaign.hpp"
#include "dflab/handshake.hpp"

using namespace dflab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDomain = 3;

struct DataError : std::runtime_error {
	using std::runtime_error::runtime_error;
};
struct DomainFailure : std::runtime_error {
	using std::runtime_error::runtime_error;
};

Bytes parse_password(const std::string &text) {
	if (text.rfind("hex:", 0) == 0)
		return from_hex(text.substr(4));
	return Bytes(text.begin(), text.end());
}

uint64_t resolve_seed(std::optional<uint64_t> seed) {
	if (seed)
		return *seed;
	uint64_t s = entropy_seed();
	std::cerr << "seed: " << s << "\n";
	return s;
}

std::string read_file(const std::string &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in.good())
		throw DataError("cannot open " + path);
	std::stringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

void write_file(const std::string &path, const std::string &content) {
	std::ofstream out(path, std::ios::binary);
	if (!out.good())
		throw DataError("cannot write " + path);
	out << content;
}

std::vector<std::string> read_wordlist(const std::string &path) {
	std::ifstream in(path);
	if (!in.good())
		throw DataError("cannot open dictionary " + path);
	std::vector<std::string> words;
	std::string line;
	while (std::getline(in, line)) {
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (!line.empty())
			words.push_back(line);
	}
	return words;
}

NoiseModel load_noise(const std::string &spec) {
	if (spec == "default" || spec == "sae-default" || spec == "eap-default" ||
	    spec == "noiseless")
		return noise_model_by_name(spec);
	return noise_from_json(read_file(spec));
}

std::vector<Trace> load_traces(const std::string &path) {
	std::string text = read_file(path);
	if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
		std::istringstream in(text);
		return traces_from_jsonl(in);
	}
	Trace t = parse_trace_text(text);
	if (t.trace_id.empty())
		t.trace_id = std::filesystem::path(path).stem().string();
	return {std::move(t)};
}

// ---- derive ----

struct DeriveArgs {
	std::string password, id_a = "02:00:00:00:00:01", id_b = "02:00:00:00:00:02";
	std::string profile = "iwd-sae", curve = "P-256", mode = "vulnerable";
	std::string token_hex;
	std::optional<uint64_t> seed;
	std::string format = "text";
};

int cmd_derive(const DeriveArgs &args) {
	const Profile &profile = profile_by_name(args.profile);
	DerivationContext ctx = DerivationContext::make(
	    profile, Identity::parse(args.id_a), Identity::parse(args.id_b),
	    parse_password(args.password), curve_by_name(args.curve),
	    args.mode == "hardened" ? Mode::Hardened : Mode::Vulnerable);
	if (!args.token_hex.empty()) {
		Bytes raw = from_hex(args.token_hex);
		if (raw.size() != 4)
			throw DataError("token must be 4 bytes of hex");
		std::copy(raw.begin(), raw.end(), ctx.token.begin());
	}
	Rng rng(resolve_seed(args.seed));
	DerivationResult res = derive_pwe(ctx, rng);

	if (args.format == "json") {
		json j{{"profile", args.profile},
		       {"mode", args.mode},
		       {"iterations_executed", res.iterations_executed},
		       {"found", res.success_iteration.has_value()}};
		if (res.success_iteration) {
			j["success_iteration"] = *res.success_iteration;
			j["element_x"] = to_hex(
			    bigint_to_fixed_bytes(res.element.x, ctx.curve->byte_len));
		}
		std::cout << j.dump() << "\n";
	} else if (res.success_iteration) {
		std::cout << "success_iteration: " << *res.success_iteration << "\n"
		          << "element_x: "
		          << to_hex(bigint_to_fixed_bytes(res.element.x,
		                                          ctx.curve->byte_len))
		          << "\n"
		          << "iterations_executed: " << res.iterations_executed << "\n";
	}
	if (!res.success_iteration)
		throw DomainFailure("no element found within the iteration limit");
	return kExitOk;
}

// ---- handshake-demo ----

struct HandshakeArgs {
	std::string password_a, password_b;
	std::string id_a = "02:00:00:00:00:01", id_b = "02:00:00:00:00:02";
	std::string profile = "iwd-sae", curve = "P-256";
	std::optional<uint64_t> seed;
	std::string format = "text";
};

int cmd_handshake_demo(const HandshakeArgs &args) {
	Bytes pw_a = parse_password(args.password_a);
	Bytes pw_b = args.password_b.empty() ? pw_a : parse_password(args.password_b);
	Rng rng(resolve_seed(args.seed));
	HandshakeReport r =
	    run_handshake(pw_a, pw_b, Identity::parse(args.id_a),
	                  Identity::parse(args.id_b), profile_by_name(args.profile),
	                  curve_by_name(args.curve), rng);
	const char *outcome = r.outcome == HandshakeOutcome::Success ? "success"
	                      : r.outcome == HandshakeOutcome::DerivationFailed
	                          ? "derivation-failed"
	                      : r.outcome == HandshakeOutcome::CommitRejected
	                          ? "commit-rejected"
	                          : "confirm-failed";
	std::string fp_a = to_hex(std::span(r.mk_a).subspan(0, 8));
	std::string fp_b = to_hex(std::span(r.mk_b).subspan(0, 8));
	if (args.format == "json") {
		json j{{"outcome", outcome},
		       {"keys_match", r.keys_match},
		       {"mk_fingerprint_a", fp_a},
		       {"mk_fingerprint_b", fp_b},
		       {"error_a", handshake_error_name(r.error_a)},
		       {"error_b", handshake_error_name(r.error_b)}};
		std::cout << j.dump() << "\n";
	} else {
		std::cout << "outcome: " << outcome << "\n"
		          << "mk fingerprint A: " << fp_a << "\n"
		          << "mk fingerprint B: " << fp_b << "\n";
	}
	if (r.outcome == HandshakeOutcome::DerivationFailed)
		throw DomainFailure("password conversion failed");
	return kExitOk;
}

// ---- simulate ----

struct SimulateArgs {
	std::string password;
	int traces = 1;
	int samples = 10;
	std::string noise = "default";
	std::string profile = "iwd-sae", curve = "P-256";
	std::optional<uint64_t> seed;
	std::string out, answers;
	std::string format = "jsonl";
};

int cmd_simulate(const SimulateArgs &args) {
	if (args.traces < 1 || args.samples < 1)
		throw DataError("need >= 1 trace and >= 1 sample");
	const Profile &profile = profile_by_name(args.profile);
	const CurveParams &curve = curve_by_name(args.curve);
	NoiseModel noise = load_noise(args.noise);
	Bytes password = parse_password(args.password);
	uint64_t seed = resolve_seed(args.seed);
	Rng master(seed);

	int n_samples = profile.variant == Variant::EapPwd ? 1 : args.samples;
	std::vector<DerivationContext> ctxs;
	for (int i = 0; i < args.traces; i++) {
		Rng setup = master.child(static_cast<uint64_t>(i)).child(100);
		DerivationContext ctx;
		if (profile.variant == Variant::Sae) {
			Identity a = Identity::random_mac(setup);
			Identity b = Identity::random_mac(setup);
			ctx = DerivationContext::make(profile, a, b, password, curve,
			                              Mode::Vulnerable);
		} else {
			ctx = DerivationContext::make(
			    profile, Identity::opaque({'p', 'e', 'e', 'r'}),
			    Identity::opaque({'s', 'e', 'r', 'v', 'e', 'r'}), password,
			    curve, Mode::Vulnerable);
			setup.fill(ctx.token);
		}
		ctxs.push_back(std::move(ctx));
	}
	std::vector<Trace> traces;
	try {
		traces = simulate_trace_batch(ctxs, n_samples, noise, master, 0);
	} catch (const std::domain_error &e) {
		throw DomainFailure(e.what());
	}

	std::string payload = args.format == "text" && traces.size() == 1
	                          ? serialize_trace(traces[0])
	                          : traces_to_jsonl(traces);
	if (args.out.empty())
		std::cout << payload;
	else
		write_file(args.out, payload);
	if (!args.answers.empty())
		write_file(args.answers, answers_jsonl(traces));
	return kExitOk;
}

// ---- parse-traces ----

struct ParseArgs {
	std::string input;
	std::string out;
	std::string answers;
	double margin = ParserConfig{}.decision_margin;
	int64_t threshold = ParserConfig{}.long_delay_threshold;
	int max_iterations = ParserConfig{}.max_iterations;
};

int cmd_parse_traces(const ParseArgs &args) {
	ParserConfig cfg;
	cfg.decision_margin = args.margin;
	cfg.long_delay_threshold = args.threshold;
	cfg.max_iterations = args.max_iterations;

	std::vector<Trace> traces;
	try {
		traces = load_traces(args.input);
	} catch (const TraceFormatError &e) {
		throw DataError(args.input + ": " + e.what());
	}
	if (traces.empty())
		throw DomainFailure("no traces in input");

	std::ostringstream out;
	size_t usable = 0, correct = 0;
	std::map<std::string, int> truth;
	if (!args.answers.empty()) {
		std::istringstream ans(read_file(args.answers));
		std::string line;
		while (std::getline(ans, line)) {
			if (line.empty())
				continue;
			json j = json::parse(line);
			truth[j.at("trace_id").get<std::string>()] =
			    j.at("truth_k").get<int>();
		}
	}
	for (const Trace &t : traces) {
		ParseOutcome o = interpret_trace(t, cfg);
		if (o.is_exact()) {
			usable++;
			auto it = truth.find(t.trace_id);
			if (it != truth.end() && it->second == o.k)
				correct++;
		}
		out << outcome_to_json(t.trace_id, o) << "\n";
	}
	if (args.out.empty())
		std::cout << out.str();
	else
		write_file(args.out, out.str());
	if (!truth.empty()) {
		std::cerr << "scored " << traces.size() << " traces: usable " << usable
		          << ", accuracy "
		          << (usable ? static_cast<double>(correct) / usable : 0.0)
		          << "\n";
	}
	if (usable == 0)
		throw DomainFailure("no trace yielded a usable outcome");
	return kExitOk;
}

// ---- prune ----

struct PruneArgs {
	std::string dictionary;
	std::string leaks;
	std::string out;
	std::string profile = "iwd-sae", curve = "P-256";
	int threads = 0;
	std::string format = "text";
};

int cmd_prune(const PruneArgs &args) {
	std::vector<std::string> dict = read_wordlist(args.dictionary);
	std::vector<Leak> leaks;
	{
		std::istringstream in(read_file(args.leaks));
		try {
			leaks = leaks_from_jsonl(in);
		} catch (const std::exception &e) {
			throw DataError(e.what());
		}
	}
	if (leaks.empty())
		throw DataError("leak file contains no leaks");

	PruneOptions opts;
	opts.variant = profile_by_name(args.profile).variant;
	opts.curve = &curve_by_name(args.curve);
	opts.n_threads = args.threads;
	PruneReport report = prune_dictionary(dict, leaks, opts);

	std::ostringstream sur;
	for (const auto &s : report.survivors)
		sur << s << "\n";
	if (args.out.empty())
		std::cout << sur.str();
	else
		write_file(args.out, sur.str());

	if (args.format == "json") {
		json j{{"input_size", report.input_size},
		       {"survivors", report.survivors.size()},
		       {"eliminated_by_leak", report.eliminated_by_leak}};
		std::cerr << j.dump() << "\n";
	} else {
		std::cerr << "pruned " << report.input_size << " -> "
		          << report.survivors.size() << " survivors with "
		          << leaks.size() << " leaks in " << report.wall_clock_ms
		          << " ms\n";
	}
	return kExitOk;
}

// ---- plan ----

struct PlanArgs {
	std::vector<double> sizes{1.4e7, 3.5e7, 5.5e8, 4.6e14};
	double target = 0.95;
	double p_s = 0.5;
	int k_max = 20;
	std::string format = "text";
};

int cmd_plan(const PlanArgs &args) {
	AttackModel model;
	model.p_s = args.p_s;
	model.k_max = args.k_max;
	if (args.format == "json") {
		json rows = json::array();
		for (double L : args.sizes) {
			rows.push_back({{"dictionary_size", L},
			                {"traces", model.traces_required(L, args.target)},
			                {"traces_expected_survivors",
			                 model.traces_required_expected_survivors(L)},
			                {"baseline_traces",
			                 model.baseline_traces_required(L, args.target)},
			                {"baseline_traces_expected_survivors",
			                 model.baseline_traces_required_expected_survivors(
			                     L)}});
		}
		std::cout << json{{"target_prob", args.target}, {"rows", rows}}.dump(2)
		          << "\n";
		return kExitOk;
	}
	std::cout << "dict size | traces (tail >= " << args.target
	          << ") | traces (E[survivors] <= 1) | baseline tail | baseline E\n";
	for (double L : args.sizes) {
		std::ostringstream row;
		row.setf(std::ios::scientific);
		row.precision(2);
		row << L;
		std::cout << row.str() << "  |  " << model.traces_required(L, args.target)
		          << "  |  " << model.traces_required_expected_survivors(L)
		          << "  |  " << model.baseline_traces_required(L, args.target)
		          << "  |  "
		          << model.baseline_traces_required_expected_survivors(L)
		          << "\n";
	}
	return kExitOk;
}

// ---- calibrate ----

struct CalibrateArgs {
	std::string start = "default";
	int traces = 2000;
	int rounds = 8;
	double tolerance = 5.0;
	std::optional<uint64_t> seed;
	std::string out;
};

int cmd_calibrate(const CalibrateArgs &args) {
	NoiseModel start = load_noise(args.start);
	ParserConfig cfg;
	Rng master(resolve_seed(args.seed));
	CalibrationResult r = calibrate(start, default_calibration_targets(),
	                                args.tolerance, args.traces, args.rounds,
	                                cfg, master);
	const auto &targets = default_calibration_targets();
	for (size_t i = 0; i < targets.size(); i++) {
		std::cerr << "samples=" << targets[i].samples_per_trace << " accuracy "
		          << r.measured[i].accuracy << " (target " << targets[i].accuracy
		          << "), usable " << r.measured[i].usable << " (target "
		          << targets[i].usable << ")\n";
	}
	std::cerr << "distance " << r.distance
	          << (r.within_tolerance ? " (within tolerance)"
	                                 : " (outside tolerance)")
	          << "\n";
	std::string payload = noise_to_json(r.model) + "\n";
	if (args.out.empty())
		std::cout << payload;
	else
		write_file(args.out, payload);
	return kExitOk;
}

// ---- bench-mitigation ----

struct BenchArgs {
	std::string profile = "iwd-sae", curve = "P-256";
	int runs = 10000;
	std::optional<uint64_t> seed;
	std::string format = "text";
};

int cmd_bench_mitigation(const BenchArgs &args) {
	if (args.runs < 100)
		throw DataError("bench needs --runs >= 100");
	Rng master(resolve_seed(args.seed));
	MitigationBench b = bench_mitigation(profile_by_name(args.profile),
	                                     curve_by_name(args.curve), args.runs,
	                                     master);
	if (args.format == "json") {
		json j{{"runs", b.n_runs},
		       {"vulnerable_ms_mean", b.vulnerable_ms_mean},
		       {"hardened_ms_mean", b.hardened_ms_mean},
		       {"overhead_ratio", b.overhead_ratio},
		       {"fingerprints_constant", b.fingerprints_constant},
		       {"outputs_equal", b.outputs_equal}};
		std::cout << j.dump() << "\n";
	} else {
		std::cout << "runs: " << b.n_runs << "\n"
		          << "vulnerable mean: " << b.vulnerable_ms_mean << " ms\n"
		          << "hardened mean:   " << b.hardened_ms_mean << " ms\n"
		          << "overhead ratio:  " << b.overhead_ratio << "\n"
		          << "hardened fingerprints constant: "
		          << (b.fingerprints_constant ? "yes" : "no") << "\n"
		          << "outputs equal: " << (b.outputs_equal ? "yes" : "no")
		          << "\n";
	}
	return kExitOk;
}

// ---- scan ----

struct ScanArgs {
	std::string dictionary;
	std::string id_a = "02:00:00:00:00:01", id_b = "02:00:00:00:00:02";
	std::string curve = "P-256";
	int threshold = 20;
	int threads = 0;
	std::string out;
};

int cmd_scan(const ScanArgs &args) {
	std::vector<std::string> dict = read_wordlist(args.dictionary);
	std::vector<ScanHit> hits = scan_high_iteration(
	    dict, Identity::parse(args.id_a), Identity::parse(args.id_b),
	    curve_by_name(args.curve), args.threshold, args.threads);
	std::ostringstream out;
	for (const ScanHit &h : hits) {
		out << h.password << " ";
		if (h.success_iteration)
			out << *h.success_iteration;
		else
			out << ">" << kEapIterationCeiling;
		out << "\n";
	}
	if (args.out.empty())
		std::cout << out.str();
	else
		write_file(args.out, out.str());
	std::cerr << hits.size() << " of " << dict.size()
	          << " entries need more than " << args.threshold << " iterations\n";
	return kExitOk;
}

// ---- campaign ----

struct CampaignArgs {
	std::string dictionary;
	std::string planted;
	int identities = 16;
	int samples = 10;
	std::string noise = "default";
	std::string profile = "iwd-sae", curve = "P-256";
	std::optional<uint64_t> seed;
	std::string out_dir;
	int threads = 0;
};

int cmd_campaign(const CampaignArgs &args) {
	CampaignConfig cfg;
	cfg.dictionary = read_wordlist(args.dictionary);
	cfg.planted_password = args.planted;
	cfg.n_identities = args.identities;
	cfg.samples_per_identity = args.samples;
	cfg.noise = load_noise(args.noise);
	cfg.profile_name = args.profile;
	cfg.curve = &curve_by_name(args.curve);
	cfg.master_seed = resolve_seed(args.seed);
	cfg.n_threads = args.threads;

	CampaignReport report = run_campaign(cfg);
	std::string report_json = campaign_report_json(cfg, report);
	if (!args.out_dir.empty()) {
		std::filesystem::create_directories(args.out_dir);
		write_file(args.out_dir + "/report.json", report_json + "\n");
		std::ostringstream sur;
		for (const auto &s : report.survivors)
			sur << s << "\n";
		write_file(args.out_dir + "/survivors.txt", sur.str());
		write_file(args.out_dir + "/leaks.jsonl", leaks_to_jsonl(report.leaks));
	} else {
		std::cout << report_json << "\n";
	}
	std::cerr << "traces " << report.traces_total << " (samples "
	          << report.samples_total << "), leaks " << report.leaks.size()
	          << ", survivors " << report.survivors.size() << ", success "
	          << (report.success ? "yes" : "no")
	          << (report.unusable_warning ? " [warning: many unusable traces]"
	                                      : "")
	          << "\n";
	return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"Dragonfly password-to-curve side-channel laboratory"};
	app.require_subcommand(1);
	app.set_config("--config");

	DeriveArgs derive_args;
	auto *sc_derive = app.add_subcommand(
	    "derive", "Run the hunting-and-pecking conversion for one context");
	sc_derive->add_option("--password", derive_args.password)->required();
	sc_derive->add_option("--id-a", derive_args.id_a);
	sc_derive->add_option("--id-b", derive_args.id_b);
	sc_derive->add_option("--profile", derive_args.profile)
	    ->check(CLI::IsMember({"iwd-sae", "rfc7664-sae", "eap-pwd"}));
	sc_derive->add_option("--curve", derive_args.curve);
	sc_derive->add_option("--mode", derive_args.mode)
	    ->check(CLI::IsMember({"vulnerable", "hardened"}));
	sc_derive->add_option("--token", derive_args.token_hex,
	                      "EAP-pwd session token (8 hex digits)");
	sc_derive->add_option("--seed", derive_args.seed);
	sc_derive->add_option("--format", derive_args.format)
	    ->check(CLI::IsMember({"text", "json"}));

	HandshakeArgs hs_args;
	auto *sc_hs = app.add_subcommand("handshake-demo",
	                                 "Run a commit/confirm exchange in-process");
	sc_hs->add_option("--password-a", hs_args.password_a)->required();
	sc_hs->add_option("--password-b", hs_args.password_b,
	                  "defaults to password-a");
	sc_hs->add_option("--id-a", hs_args.id_a);
	sc_hs->add_option("--id-b", hs_args.id_b);
	sc_hs->add_option("--profile", hs_args.profile);
	sc_hs->add_option("--curve", hs_args.curve);
	sc_hs->add_option("--seed", hs_args.seed);
	sc_hs->add_option("--format", hs_args.format)
	    ->check(CLI::IsMember({"text", "json"}));

	SimulateArgs sim_args;
	auto *sc_sim = app.add_subcommand(
	    "simulate", "Generate spy-process traces of derivation runs");
	sc_sim->add_option("--password", sim_args.password)->required();
	sc_sim->add_option("--traces", sim_args.traces);
	sc_sim->add_option("--samples", sim_args.samples,
	                   "samples per trace (EAP-pwd is fixed at 1)");
	sc_sim->add_option("--noise", sim_args.noise,
	                   "default|eap-default|noiseless|<model.json>");
	sc_sim->add_option("--profile", sim_args.profile);
	sc_sim->add_option("--curve", sim_args.curve);
	sc_sim->add_option("--seed", sim_args.seed);
	sc_sim->add_option("--out", sim_args.out);
	sc_sim->add_option("--answers", sim_args.answers,
	                   "write the ground-truth sidecar here");
	sc_sim->add_option("--format", sim_args.format)
	    ->check(CLI::IsMember({"text", "jsonl"}));

	ParseArgs parse_args;
	auto *sc_parse = app.add_subcommand(
	    "parse-traces", "Interpret traces into success-iteration outcomes");
	sc_parse->add_option("input", parse_args.input)->required();
	sc_parse->add_option("--out", parse_args.out);
	sc_parse->add_option("--answers", parse_args.answers,
	                     "score outcomes against this sidecar");
	sc_parse->add_option("--margin", parse_args.margin);
	sc_parse->add_option("--threshold", parse_args.threshold);
	sc_parse->add_option("--max-iterations", parse_args.max_iterations);

	PruneArgs prune_args;
	auto *sc_prune = app.add_subcommand(
	    "prune", "Eliminate dictionary entries inconsistent with leaks");
	sc_prune->add_option("--dictionary", prune_args.dictionary)->required();
	sc_prune->add_option("--leaks", prune_args.leaks)->required();
	sc_prune->add_option("--out", prune_args.out);
	sc_prune->add_option("--profile", prune_args.profile);
	sc_prune->add_option("--curve", prune_args.curve);
	sc_prune->add_option("--threads", prune_args.threads);
	sc_prune->add_option("--format", prune_args.format)
	    ->check(CLI::IsMember({"text", "json"}));

	PlanArgs plan_args;
	auto *sc_plan = app.add_subcommand(
	    "plan", "Closed-form trace counts to prune a dictionary");
	sc_plan->add_option("--sizes", plan_args.sizes)->delimiter(',');
	sc_plan->add_option("--target", plan_args.target);
	sc_plan->add_option("--p-s", plan_args.p_s);
	sc_plan->add_option("--k-max", plan_args.k_max);
	sc_plan->add_option("--format", plan_args.format)
	    ->check(CLI::IsMember({"text", "json"}));

	CalibrateArgs cal_args;
	auto *sc_cal = app.add_subcommand(
	    "calibrate", "Search noise parameters against the reliability targets");
	sc_cal->add_option("--start", cal_args.start);
	sc_cal->add_option("--traces", cal_args.traces);
	sc_cal->add_option("--rounds", cal_args.rounds);
	sc_cal->add_option("--tolerance", cal_args.tolerance);
	sc_cal->add_option("--seed", cal_args.seed);
	sc_cal->add_option("--out", cal_args.out);

	BenchArgs bench_args;
	auto *sc_bench = app.add_subcommand(
	    "bench-mitigation",
	    "Compare vulnerable and hardened derivation timings");
	sc_bench->add_option("--profile", bench_args.profile);
	sc_bench->add_option("--curve", bench_args.curve);
	sc_bench->add_option("--runs", bench_args.runs);
	sc_bench->add_option("--seed", bench_args.seed);
	sc_bench->add_option("--format", bench_args.format)
	    ->check(CLI::IsMember({"text", "json"}));

	ScanArgs scan_args;
	auto *sc_scan = app.add_subcommand(
	    "scan-high-iter", "List dictionary entries needing many iterations");
	sc_scan->add_option("--dictionary", scan_args.dictionary)->required();
	sc_scan->add_option("--id-a", scan_args.id_a);
	sc_scan->add_option("--id-b", scan_args.id_b);
	sc_scan->add_option("--curve", scan_args.curve);
	sc_scan->add_option("--threshold", scan_args.threshold);
	sc_scan->add_option("--threads", scan_args.threads);
	sc_scan->add_option("--out", scan_args.out);

	CampaignArgs camp_args;
	auto *sc_camp = app.add_subcommand(
	    "campaign", "simulate -> parse -> leak -> prune, end to end");
	sc_camp->add_option("--dictionary", camp_args.dictionary)->required();
	sc_camp->add_option("--planted", camp_args.planted)->required();
	sc_camp->add_option("--identities", camp_args.identities);
	sc_camp->add_option("--samples", camp_args.samples);
	sc_camp->add_option("--noise", camp_args.noise);
	sc_camp->add_option("--profile", camp_args.profile);
	sc_camp->add_option("--curve", camp_args.curve);
	sc_camp->add_option("--seed", camp_args.seed);
	sc_camp->add_option("--out-dir", camp_args.out_dir);
	sc_camp->add_option("--threads", camp_args.threads);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		if (e.get_exit_code() == 0) {
			app.exit(e); // --help
			return kExitOk;
		}
		app.exit(e);
		return kExitUsage;
	}

	try {
		if (sc_derive->parsed())
			return cmd_derive(derive_args);
		if (sc_hs->parsed())
			return cmd_handshake_demo(hs_args);
		if (sc_sim->parsed())
			return cmd_simulate(sim_args);
		if (sc_parse->parsed())
			return cmd_parse_traces(parse_args);
		if (sc_prune->parsed())
			return cmd_prune(prune_args);
		if (sc_plan->parsed())
			return cmd_plan(plan_args);
		if (sc_cal->parsed())
			return cmd_calibrate(cal_args);
		if (sc_bench->parsed())
			return cmd_bench_mitigation(bench_args);
		if (sc_scan->parsed())
			return cmd_scan(scan_args);
		if (sc_camp->parsed())
			return cmd_campaign(camp_args);
	} catch (const DomainFailure &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitDomain;
	} catch (const DataError &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	} catch (const TraceFormatError &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	}
	return kExitUsage;
}

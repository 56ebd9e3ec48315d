#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dflab/sidechannel_sim.hpp"
#include "dflab/trace_parser.hpp"

using namespace dflab;

static int count_label(const Sample &s, ProbeEvent::Label l) {
	int n = 0;
	for (const ProbeEvent &e : s)
		if (e.label == l)
			n++;
	return n;
}

TEST_CASE("noiseless sample structure") {
	NoiseModel noise = NoiseModel::noiseless();
	Rng rng(1);
	SessionEnv env;
	Sample s = simulate_sample(4, 20, noise, env, rng);

	// preamble draws, then per iteration: clocks + the blinding draw,
	// plus exactly one long success call at iteration 4
	CHECK(count_label(s, ProbeEvent::Label::SyncClock) == 20 * noise.clocks_per_iter);
	CHECK(count_label(s, ProbeEvent::Label::RandomCall) ==
	      noise.preamble_events + 20 + 1);
	for (int i = 0; i < noise.preamble_events; i++)
		CHECK(s[static_cast<size_t>(i)].label == ProbeEvent::Label::RandomCall);

	int longs = 0;
	for (const ProbeEvent &e : s) {
		CHECK(e.delta >= 0);
		CHECK(e.latency > 0);
		if (e.label == ProbeEvent::Label::RandomCall && e.delta > 1500 &&
		    e.delta < 100000)
			longs++;
	}
	CHECK(longs == 1);
}

TEST_CASE("simulate_sample input validation") {
	NoiseModel noise = NoiseModel::noiseless();
	Rng rng(1);
	SessionEnv env;
	CHECK_THROWS_AS(simulate_sample(0, 20, noise, env, rng), std::invalid_argument);
	CHECK_THROWS_AS(simulate_sample(5, 4, noise, env, rng), std::invalid_argument);
	NoiseModel bad = noise;
	bad.long_delay = bad.short_delay;
	CHECK_THROWS_AS(simulate_sample(1, 1, bad, env, rng), std::invalid_argument);
}

TEST_CASE("dead sessions carry no long delays") {
	NoiseModel noise = NoiseModel::noiseless();
	Rng rng(2);
	SessionEnv env;
	env.dead = true;
	Sample s = simulate_sample(3, 20, noise, env, rng);
	for (const ProbeEvent &e : s) {
		if (e.label == ProbeEvent::Label::RandomCall && e.delta < 100000)
			CHECK(e.delta < 1500);
	}
}

TEST_CASE("simulate_trace uses the real conversion for ground truth") {
	DerivationContext ctx = DerivationContext::make(
	    profile_by_name("iwd-sae"), Identity::parse("e2f754fe22d1"),
	    Identity::parse("9203835a576b"), Bytes{'p', 'w'}, p256(),
	    Mode::Vulnerable);
	Rng rng(3);
	Trace t = simulate_trace(ctx, 5, NoiseModel::noiseless(), rng);
	REQUIRE(t.ground_truth.has_value());
	CHECK(t.samples.size() == 5);

	std::optional<int> expect = fast_success_iteration(
	    Variant::Sae, ctx.id_a, ctx.id_b, {}, ctx.password, p256(), 20);
	REQUIRE(expect.has_value());
	CHECK(*t.ground_truth == *expect);
}

TEST_CASE("eap-pwd traces are single-sample") {
	DerivationContext ctx = DerivationContext::make(
	    profile_by_name("eap-pwd"), Identity::parse("utf8:peer"),
	    Identity::parse("utf8:server"), Bytes{'p', 'w'}, p256(), Mode::Vulnerable);
	ctx.token = {1, 2, 3, 4};
	Rng rng(4);
	CHECK_THROWS_AS(simulate_trace(ctx, 2, NoiseModel::noiseless(), rng),
	                std::invalid_argument);
	Trace t = simulate_trace(ctx, 1, NoiseModel::noiseless(), rng);
	CHECK(t.samples.size() == 1);
	REQUIRE(t.token.has_value());
	// early exit: the sample ends at the success iteration
	REQUIRE(t.ground_truth.has_value());
	CHECK(count_label(t.samples[0], ProbeEvent::Label::SyncClock) ==
	      *t.ground_truth * 3);
}

TEST_CASE("fixed seed gives byte-identical serialization") {
	DerivationContext ctx = DerivationContext::make(
	    profile_by_name("iwd-sae"), Identity::parse("e2f754fe22d1"),
	    Identity::parse("9203835a576b"), Bytes{'p', 'w'}, p256(),
	    Mode::Vulnerable);
	NoiseModel noise = NoiseModel::sae_default();
	Rng r1(42), r2(42);
	Trace t1 = simulate_trace(ctx, 3, noise, r1);
	Trace t2 = simulate_trace(ctx, 3, noise, r2);
	CHECK(serialize_trace(t1) == serialize_trace(t2));
	std::vector<Trace> v1{t1}, v2{t2};
	CHECK(traces_to_jsonl(v1) == traces_to_jsonl(v2));
}

TEST_CASE("text round trip") {
	DerivationContext ctx = DerivationContext::make(
	    profile_by_name("iwd-sae"), Identity::parse("e2f754fe22d1"),
	    Identity::parse("9203835a576b"), Bytes{'p', 'w'}, p256(),
	    Mode::Vulnerable);
	Rng rng(5);
	Trace t = simulate_trace(ctx, 4, NoiseModel::sae_default(), rng);
	t.trace_id = "t7";

	std::string text = serialize_trace(t);
	Trace back = parse_trace_text(text);
	CHECK(back.trace_id == "t7");
	CHECK(back.id_a == t.id_a);
	CHECK(back.id_b == t.id_b);
	REQUIRE(back.samples.size() == t.samples.size());
	for (size_t i = 0; i < t.samples.size(); i++) {
		REQUIRE(back.samples[i].size() == t.samples[i].size());
		for (size_t j = 0; j < t.samples[i].size(); j++) {
			CHECK(back.samples[i][j].label == t.samples[i][j].label);
			CHECK(back.samples[i][j].delta == t.samples[i][j].delta);
			CHECK(back.samples[i][j].latency == t.samples[i][j].latency);
		}
	}
	CHECK_FALSE(back.ground_truth.has_value()); // never serialized
	// serialize(parse(x)) is the identity on normalized text
	CHECK(serialize_trace(back) == text);
}

TEST_CASE("text parser errors carry line numbers") {
	CHECK_THROWS_AS(parse_trace_text("kdf_sha256 12\n"), TraceFormatError);
	CHECK_THROWS_AS(parse_trace_text("who_knows 12 (3)\n"), TraceFormatError);
	CHECK_THROWS_AS(parse_trace_text("kdf_sha256 -5 (3)\n"), TraceFormatError);
	try {
		parse_trace_text("kdf_sha256 10 (80)\n\nbadline\n");
		FAIL("expected a parse error");
	} catch (const TraceFormatError &e) {
		CHECK(e.line == 3);
	}
}

TEST_CASE("single-line event parses the capture line shape") {
	Trace t = parse_trace_text("kdf_sha256 3324 (86)\n");
	REQUIRE(t.samples.size() == 1);
	REQUIRE(t.samples[0].size() == 1);
	CHECK(t.samples[0][0].label == ProbeEvent::Label::SyncClock);
	CHECK(t.samples[0][0].delta == 3324);
	CHECK(t.samples[0][0].latency == 86);
}

TEST_CASE("captured fixture has the documented preamble") {
	std::ifstream in(std::string(DFLAB_TEST_DATA_DIR) + "/sae_capture_k4.txt");
	REQUIRE(in.good());
	std::stringstream buf;
	buf << in.rdbuf();
	Trace t = parse_trace_text(buf.str());
	REQUIRE(t.samples.size() >= 1);
	int preamble = 0;
	for (const ProbeEvent &e : t.samples[0]) {
		if (e.label != ProbeEvent::Label::RandomCall)
			break;
		preamble++;
	}
	CHECK(preamble == 5);
}

TEST_CASE("jsonl round trip and answers sidecar") {
	std::vector<DerivationContext> ctxs;
	Rng rng(6);
	for (int i = 0; i < 3; i++) {
		Rng setup = rng.child(i);
		ctxs.push_back(DerivationContext::make(
		    profile_by_name("iwd-sae"), Identity::random_mac(setup),
		    Identity::random_mac(setup), setup.bytes(6), p256(),
		    Mode::Vulnerable));
	}
	Rng master(7);
	std::vector<Trace> traces =
	    simulate_trace_batch(ctxs, 2, NoiseModel::sae_default(), master, 2);
	std::vector<Trace> serial =
	    simulate_trace_batch_serial(ctxs, 2, NoiseModel::sae_default(), master);
	CHECK(traces_to_jsonl(traces) == traces_to_jsonl(serial));

	std::string jsonl = traces_to_jsonl(traces);
	std::istringstream in(jsonl);
	std::vector<Trace> back = traces_from_jsonl(in);
	REQUIRE(back.size() == traces.size());
	for (size_t i = 0; i < traces.size(); i++) {
		CHECK(back[i].trace_id == traces[i].trace_id);
		CHECK(back[i].samples.size() == traces[i].samples.size());
		CHECK(back[i].id_a == traces[i].id_a);
	}

	std::string answers = answers_jsonl(traces);
	CHECK(std::count(answers.begin(), answers.end(), '\n') == 3);
	CHECK(answers.find("truth_k") != std::string::npos);
}

TEST_CASE("spurious long delays appear at the modeled rate") {
	NoiseModel noise = NoiseModel::noiseless();
	noise.base.spurious_long_delay_prob = 0.1;
	Rng master(8);
	SessionEnv env;
	int total_iters = 20, n = 10000;
	int with_spurious = 0;
	for (int i = 0; i < n; i++) {
		Rng rng = master.child(i);
		Sample s = simulate_sample(1, total_iters, noise, env, rng);
		// truth is 1: any long random beyond one is spurious
		int longs = 0;
		for (const ProbeEvent &e : s)
			if (e.label == ProbeEvent::Label::RandomCall && e.delta > 1500 &&
			    e.delta < 100000)
				longs++;
		if (longs > 1)
			with_spurious++;
	}
	// one disturbance per sample with probability 0.1; 3-sigma band
	double p = noise.base.spurious_long_delay_prob;
	double sigma = std::sqrt(p * (1 - p) / n);
	CHECK(std::abs(static_cast<double>(with_spurious) / n - p) < 3 * sigma);
}

TEST_CASE("success marker survives at the modeled rate") {
	NoiseModel noise = NoiseModel::noiseless();
	noise.base.randomcall_miss_prob = 0.3;
	Rng master(9);
	SessionEnv env;
	int n = 4000, with_marker = 0;
	for (int i = 0; i < n; i++) {
		Rng rng = master.child(i);
		Sample s = simulate_sample(5, 20, noise, env, rng);
		for (const ProbeEvent &e : s) {
			if (e.label == ProbeEvent::Label::RandomCall && e.delta > 1500 &&
			    e.delta < 100000) {
				with_marker++;
				break;
			}
		}
	}
	// the marker appears with probability 1 - randomcall_miss_prob
	double p = 1.0 - noise.base.randomcall_miss_prob;
	double sigma = std::sqrt(p * (1 - p) / n);
	CHECK(std::abs(static_cast<double>(with_marker) / n - p) < 3.5 * sigma);
}

TEST_CASE("noise model json round trip") {
	NoiseModel m = NoiseModel::sae_default();
	m.seed = 99;
	std::string text = noise_to_json(m);
	NoiseModel back = noise_from_json(text);
	CHECK(back.base.clock_miss_prob == m.base.clock_miss_prob);
	CHECK(back.degraded.malformed_sample_prob == m.degraded.malformed_sample_prob);
	CHECK(back.dead_session_prob == m.dead_session_prob);
	CHECK(back.long_delay.median == m.long_delay.median);
	CHECK(back.seed == 99);
	CHECK(noise_to_json(back) == text);
	CHECK_THROWS(noise_from_json("{"));
}

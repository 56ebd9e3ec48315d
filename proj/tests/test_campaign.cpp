#include <doctest.h>

#include "dflab/campaign.hpp"

using namespace dflab;

static std::vector<std::string> small_dict(int n) {
	std::vector<std::string> d;
	for (int i = 0; i < n; i++)
		d.push_back("w" + std::to_string(i));
	return d;
}

TEST_CASE("noiseless campaign recovers the planted password") {
	CampaignConfig cfg;
	cfg.dictionary = small_dict(120);
	cfg.planted_password = "the-planted-one";
	cfg.n_identities = 8;
	cfg.samples_per_identity = 1;
	cfg.noise = NoiseModel::noiseless();
	cfg.master_seed = 11;
	CampaignReport r = run_campaign(cfg);
	CHECK(r.traces_total == 8);
	CHECK(r.samples_total == 8);
	CHECK(r.leaks.size() == 8);
	CHECK(r.traces_without_leak == 0);
	CHECK_FALSE(r.unusable_warning);
	// 8 exact leaks cut 120 candidates down to the planted one with
	// high probability; survivors always include it
	bool planted_alive = false;
	for (const auto &s : r.survivors)
		planted_alive = planted_alive || s == cfg.planted_password;
	CHECK(planted_alive);
	if (r.survivors.size() == 1)
		CHECK(r.success);
}

TEST_CASE("campaign totals and determinism") {
	CampaignConfig cfg;
	cfg.dictionary = small_dict(40);
	cfg.planted_password = "w7"; // already a dictionary member
	cfg.n_identities = 5;
	cfg.samples_per_identity = 3;
	cfg.noise = NoiseModel::sae_default();
	cfg.master_seed = 21;
	CampaignReport r1 = run_campaign(cfg);
	CampaignReport r2 = run_campaign(cfg);
	CHECK(r1.samples_total == 15);
	CHECK(campaign_report_json(cfg, r1) == campaign_report_json(cfg, r2));
	CHECK(r1.survivors == r2.survivors);
	// planted stays in the pool whatever the leaks said
	bool alive = false;
	for (const auto &s : r1.survivors)
		alive = alive || s == "w7";
	CHECK(alive);
}

TEST_CASE("a dead channel raises the unusable warning") {
	CampaignConfig cfg;
	cfg.dictionary = small_dict(10);
	cfg.planted_password = "nothing-learned";
	cfg.n_identities = 4;
	cfg.samples_per_identity = 2;
	// eviction never works and the residual short delays are flat, so
	// no trace can clear the decision margin by accident
	cfg.noise = NoiseModel::noiseless();
	cfg.noise.dead_session_prob = 1.0;
	cfg.noise.short_delay = {220, 0.02};
	cfg.master_seed = 31;
	CampaignReport r = run_campaign(cfg);
	CHECK(r.traces_without_leak == 4);
	CHECK(r.unusable_warning);
	CHECK_FALSE(r.success);
	CHECK(r.survivors.size() == 11); // dictionary plus the planted entry
}

TEST_CASE("eap-pwd campaign uses one sample per session") {
	CampaignConfig cfg;
	cfg.dictionary = small_dict(60);
	cfg.planted_password = "radius-secret";
	cfg.n_identities = 10;
	cfg.samples_per_identity = 15; // forced down to 1 by the variant
	cfg.profile_name = "eap-pwd";
	cfg.noise = NoiseModel::eap_default();
	cfg.master_seed = 41;
	CampaignReport r = run_campaign(cfg);
	CHECK(r.samples_total == 10);
	bool alive = false;
	for (const auto &s : r.survivors)
		alive = alive || s == cfg.planted_password;
	CHECK(alive);
	for (const Leak &leak : r.leaks)
		CHECK(leak.token.has_value());
}

TEST_CASE("collection shape: ten identities, fifteen samples each") {
	std::vector<DerivationContext> ctxs;
	Rng rng(51);
	for (int i = 0; i < 10; i++) {
		Rng setup = rng.child(i);
		ctxs.push_back(DerivationContext::make(
		    profile_by_name("iwd-sae"), Identity::random_mac(setup),
		    Identity::random_mac(setup), setup.bytes(8), p256(),
		    Mode::Vulnerable));
	}
	std::vector<Trace> traces =
	    simulate_trace_batch(ctxs, 15, NoiseModel::sae_default(), Rng(52), 2);
	REQUIRE(traces.size() == 10);
	for (const Trace &t : traces)
		CHECK(t.samples.size() == 15);
}

TEST_CASE("monte carlo derivation statistics") {
	DeriveStats stats = monte_carlo_derive(profile_by_name("iwd-sae"), p256(),
	                                       Mode::Vulnerable, 600, 10, Rng(61), 2);
	CHECK(stats.n_runs == 600);
	CHECK(stats.qr_tests >= 600 * 19);
	double rate = static_cast<double>(stats.qr_passes) / stats.qr_tests;
	CHECK(rate > 0.46);
	CHECK(rate < 0.54);
	// about half the contexts convert on the first counter
	double first = static_cast<double>(stats.success_at[1]) / 600;
	CHECK(first > 0.42);
	CHECK(first < 0.58);
	// parallel equals serial
	DeriveStats serial = monte_carlo_derive(profile_by_name("iwd-sae"), p256(),
	                                        Mode::Vulnerable, 600, 10, Rng(61), 1);
	CHECK(serial.qr_passes == stats.qr_passes);
	CHECK(serial.success_at == stats.success_at);
}

TEST_CASE("mitigation bench sanity") {
	CHECK_THROWS_AS(
	    bench_mitigation(profile_by_name("iwd-sae"), p256(), 10, Rng(1)),
	    std::invalid_argument);
	MitigationBench b =
	    bench_mitigation(profile_by_name("iwd-sae"), toy11(), 150, Rng(71));
	CHECK(b.outputs_equal);
	CHECK(b.fingerprints_constant);
	CHECK(b.vulnerable_ms_mean > 0);
	CHECK(b.hardened_ms_mean > 0);
}

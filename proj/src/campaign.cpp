#include "dflab/campaign.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>

namespace dflab {

using nlohmann::json;

static Trace collect_trace(const Profile &profile, const CurveParams &curve,
                           const Bytes &password, int n_samples,
                           const NoiseModel &noise, Rng trace_rng) {
	// a fresh identity pair (or token) per attempt; retry the
	// astronomically rare no-element contexts
	for (uint64_t attempt = 0;; attempt++) {
		Rng arng = trace_rng.child(attempt);
		DerivationContext ctx;
		Rng id_rng = arng.child(0);
		if (profile.variant == Variant::Sae) {
			Identity a = Identity::random_mac(id_rng);
			Identity b = Identity::random_mac(id_rng);
			ctx = DerivationContext::make(profile, a, b, password, curve,
			                              Mode::Vulnerable);
		} else {
			ctx = DerivationContext::make(
			    profile, Identity::opaque({'p', 'e', 'e', 'r'}),
			    Identity::opaque({'s', 'e', 'r', 'v', 'e', 'r'}), password,
			    curve, Mode::Vulnerable);
			id_rng.fill(ctx.token);
		}
		try {
			Rng srng = arng.child(1);
			return simulate_trace(ctx, n_samples, noise, srng);
		} catch (const std::domain_error &) {
			continue; // conversion exceeded the cap; new identities
		}
	}
}

CampaignReport run_campaign(const CampaignConfig &cfg) {
	auto start = std::chrono::steady_clock::now();
	const CurveParams &curve = cfg.curve ? *cfg.curve : p256();
	const Profile &profile = profile_by_name(cfg.profile_name);
	if (cfg.n_identities < 1 || cfg.samples_per_identity < 1)
		throw std::invalid_argument("campaign needs >= 1 identity and sample");
	if (cfg.planted_password.empty())
		throw std::invalid_argument("campaign needs a planted password");
	int n_samples =
	    profile.variant == Variant::EapPwd ? 1 : cfg.samples_per_identity;

	Rng master(cfg.master_seed);
	Bytes planted(cfg.planted_password.begin(), cfg.planted_password.end());

	CampaignReport report;
	report.traces_total = static_cast<size_t>(cfg.n_identities);
	report.samples_total = report.traces_total * static_cast<size_t>(n_samples);

	std::vector<Trace> traces(static_cast<size_t>(cfg.n_identities));
	long n = cfg.n_identities;
#pragma omp parallel for schedule(dynamic, 4) \
    num_threads(cfg.n_threads > 0 ? cfg.n_threads : omp_get_max_threads())
	for (long i = 0; i < n; i++) {
		traces[static_cast<size_t>(i)] =
		    collect_trace(profile, curve, planted, n_samples, cfg.noise,
		                  master.child(static_cast<uint64_t>(i)));
		traces[static_cast<size_t>(i)].trace_id = "t" + std::to_string(i);
	}

	for (const Trace &trace : traces) {
		ParseOutcome outcome = interpret_trace(trace, cfg.parser);
		bool leaked = false;
		if (outcome.kind == ParseOutcome::Kind::Exact) {
			Leak leak;
			leak.id_a = trace.id_a;
			leak.id_b = trace.id_b;
			leak.token = trace.token;
			leak.k = outcome.k;
			leak.kind = Leak::Kind::Exact;
			report.leaks.push_back(std::move(leak));
			leaked = true;
		} else if (outcome.kind == ParseOutcome::Kind::LowerBound &&
		           outcome.k_min >= 1) {
			Leak leak;
			leak.id_a = trace.id_a;
			leak.id_b = trace.id_b;
			leak.token = trace.token;
			leak.k = outcome.k_min;
			leak.kind = Leak::Kind::AtLeast;
			report.leaks.push_back(std::move(leak));
			leaked = true;
		}
		if (!leaked)
			report.traces_without_leak++;
		report.trace_ids.push_back(trace.trace_id);
		report.outcomes.push_back(std::move(outcome));
	}
	report.unusable_warning =
	    static_cast<double>(report.traces_without_leak) >
	    cfg.unusable_ceiling * static_cast<double>(report.traces_total);

	std::vector<std::string> candidates = cfg.dictionary;
	if (std::find(candidates.begin(), candidates.end(), cfg.planted_password) ==
	    candidates.end())
		candidates.push_back(cfg.planted_password);

	if (report.leaks.empty()) {
		report.survivors = candidates; // nothing learned
	} else {
		PruneOptions opts;
		opts.variant = profile.variant;
		opts.curve = &curve;
		opts.n_threads = cfg.n_threads;
		PruneReport pruned = prune_dictionary(candidates, report.leaks, opts);
		report.survivors = std::move(pruned.survivors);
	}
	report.success = report.survivors.size() == 1 &&
	                 report.survivors.front() == cfg.planted_password;
	report.wall_clock_ms =
	    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
	                                              start)
	        .count();
	return report;
}

std::string campaign_report_json(const CampaignConfig &cfg,
                                 const CampaignReport &report) {
	json outcomes = json::array();
	for (size_t i = 0; i < report.outcomes.size(); i++)
		outcomes.push_back(
		    json::parse(outcome_to_json(report.trace_ids[i], report.outcomes[i])));
	json j{{"seed", cfg.master_seed},
	       {"profile", cfg.profile_name},
	       {"identities", cfg.n_identities},
	       {"samples_per_identity",
	        profile_by_name(cfg.profile_name).variant == Variant::EapPwd
	            ? 1
	            : cfg.samples_per_identity},
	       {"traces_total", report.traces_total},
	       {"samples_total", report.samples_total},
	       {"traces_without_leak", report.traces_without_leak},
	       {"unusable_warning", report.unusable_warning},
	       {"outcomes", outcomes},
	       {"leaks", report.leaks.size()},
	       {"survivors", report.survivors},
	       {"success", report.success}};
	return j.dump(2);
}

DeriveStats monte_carlo_derive(const Profile &profile, const CurveParams &curve,
                               Mode mode, size_t n_runs, size_t password_len,
                               const Rng &master, int n_threads) {
	int hist_len =
	    profile.variant == Variant::Sae ? profile.k_max : kEapIterationCeiling;
	DeriveStats stats;
	stats.n_runs = n_runs;
	stats.success_at.assign(static_cast<size_t>(hist_len) + 1, 0);

	long n = static_cast<long>(n_runs);
	std::vector<DeriveStats> partial(
	    static_cast<size_t>(n_threads > 0 ? n_threads : omp_get_max_threads()));
	for (auto &p : partial)
		p.success_at.assign(static_cast<size_t>(hist_len) + 1, 0);

#pragma omp parallel num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
	{
		DeriveStats &local = partial[static_cast<size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 16)
		for (long i = 0; i < n; i++) {
			Rng rng = master.child(static_cast<uint64_t>(i));
			DerivationContext ctx;
			Rng setup = rng.child(0);
			Bytes pw = setup.bytes(password_len);
			if (profile.variant == Variant::Sae) {
				Identity a = Identity::random_mac(setup);
				Identity b = Identity::random_mac(setup);
				ctx = DerivationContext::make(profile, a, b, pw, curve, mode);
			} else {
				ctx = DerivationContext::make(
				    profile, Identity::opaque({'p'}), Identity::opaque({'s'}),
				    pw, curve, mode);
				setup.fill(ctx.token);
			}
			Rng drng = rng.child(1);
			DerivationResult res = derive_pwe(ctx, drng);
			if (res.success_iteration)
				local.success_at[static_cast<size_t>(*res.success_iteration)]++;
			else
				local.not_found++;
			for (const IterationOutcome &o : res.outcome_log) {
				if (o.qr_test_result != 0) {
					local.qr_tests++;
					if (o.qr_test_result > 0)
						local.qr_passes++;
				}
			}
		}
	}
	for (const DeriveStats &p : partial) {
		stats.not_found += p.not_found;
		stats.qr_tests += p.qr_tests;
		stats.qr_passes += p.qr_passes;
		for (size_t k = 0; k < stats.success_at.size(); k++)
			stats.success_at[k] += p.success_at[k];
	}
	return stats;
}

MitigationBench bench_mitigation(const Profile &profile, const CurveParams &curve,
                                 int n_runs, const Rng &master) {
	if (n_runs < 100)
		throw std::invalid_argument("bench needs >= 100 runs");
	MitigationBench bench;
	bench.n_runs = n_runs;

	std::vector<DerivationContext> ctxs;
	ctxs.reserve(static_cast<size_t>(n_runs));
	for (int i = 0; i < n_runs; i++) {
		Rng setup = master.child(static_cast<uint64_t>(i)).child(0);
		Bytes pw = setup.bytes(12);
		Identity a = Identity::random_mac(setup);
		Identity b = Identity::random_mac(setup);
		ctxs.push_back(
		    DerivationContext::make(profile, a, b, pw, curve, Mode::Vulnerable));
	}

	auto run_all = [&](Mode mode) {
		auto t0 = std::chrono::steady_clock::now();
		std::vector<DerivationResult> out;
		out.reserve(ctxs.size());
		for (size_t i = 0; i < ctxs.size(); i++) {
			DerivationContext ctx = ctxs[i];
			ctx.mode = mode;
			Rng rng = master.child(i).child(1);
			out.push_back(derive_pwe(ctx, rng));
		}
		double ms = std::chrono::duration<double, std::milli>(
		                std::chrono::steady_clock::now() - t0)
		                .count();
		return std::make_pair(ms, std::move(out));
	};

	auto [vuln_ms, vuln_res] = run_all(Mode::Vulnerable);
	auto [hard_ms, hard_res] = run_all(Mode::Hardened);
	bench.vulnerable_ms_mean = vuln_ms / n_runs;
	bench.hardened_ms_mean = hard_ms / n_runs;
	bench.overhead_ratio = hard_ms / vuln_ms;

	bench.outputs_equal = true;
	for (size_t i = 0; i < ctxs.size(); i++) {
		if (!(vuln_res[i].element == hard_res[i].element) ||
		    vuln_res[i].success_iteration != hard_res[i].success_iteration)
			bench.outputs_equal = false;
	}

	bench.fingerprints_constant = true;
	std::vector<EventKind> reference;
	int probe = std::min(n_runs, 64);
	for (int i = 0; i < probe; i++) {
		DerivationContext ctx = ctxs[static_cast<size_t>(i)];
		ctx.mode = Mode::Hardened;
		Rng rng = master.child(static_cast<uint64_t>(i)).child(2);
		std::vector<EventKind> fp = operation_trace_fingerprint(ctx, rng);
		if (i == 0)
			reference = std::move(fp);
		else if (fp != reference)
			bench.fingerprints_constant = false;
	}
	return bench;
}

} // namespace dflab

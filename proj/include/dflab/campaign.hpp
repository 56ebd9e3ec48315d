#pragma once

#include "dflab/dict_attack.hpp"
#include "dflab/trace_parser.hpp"

namespace dflab {

struct CampaignConfig {
	std::vector<std::string> dictionary;
	std::string planted_password;
	int n_identities = 16;       // traces to collect
	int samples_per_identity = 10;
	NoiseModel noise = NoiseModel::sae_default();
	std::string profile_name = "iwd-sae";
	const CurveParams *curve = nullptr; // default P-256
	uint64_t master_seed = 1;
	ParserConfig parser;
	// fraction of traces yielding no leak that triggers a report warning
	double unusable_ceiling = 0.5;
	int n_threads = 0;
};

struct CampaignReport {
	std::vector<std::string> trace_ids;
	std::vector<ParseOutcome> outcomes;
	std::vector<Leak> leaks;
	std::vector<std::string> survivors;
	bool success = false; // survivors == { planted }
	size_t traces_total = 0;
	size_t samples_total = 0;
	size_t traces_without_leak = 0;
	bool unusable_warning = false;
	double wall_clock_ms = 0; // informational; never serialized
};

// simulate -> parse -> collect leaks -> prune. The planted password is
// what the victim derives with; it is appended to the candidate list
// if absent. Deterministic for a fixed config.
CampaignReport run_campaign(const CampaignConfig &cfg);

// Machine-readable report; excludes timing so equal seeds give equal
// bytes.
std::string campaign_report_json(const CampaignConfig &cfg,
                                 const CampaignReport &report);

// ---- shared Monte-Carlo helpers ----

struct DeriveStats {
	size_t n_runs = 0;
	size_t not_found = 0;
	std::vector<size_t> success_at; // index k (1-based), up to k_max
	size_t qr_tests = 0;
	size_t qr_passes = 0;
};

// Random (password, identity/token) contexts under a profile;
// aggregates success-iteration counts and per-iteration residue-test
// outcomes.
DeriveStats monte_carlo_derive(const Profile &profile, const CurveParams &curve,
                               Mode mode, size_t n_runs, size_t password_len,
                               const Rng &master, int n_threads = 0);

struct MitigationBench {
	int n_runs = 0;
	double vulnerable_ms_mean = 0;
	double hardened_ms_mean = 0;
	double overhead_ratio = 0; // hardened / vulnerable
	bool fingerprints_constant = false;
	bool outputs_equal = false;
};

// Times both execution modes over the same random contexts and checks
// the hardened mode's operation-sequence constancy and output
// equivalence.
MitigationBench bench_mitigation(const Profile &profile, const CurveParams &curve,
                                 int n_runs, const Rng &master);

} // namespace dflab

// Compares the OpenMP kernels against their serial reference
// implementations: batch derivation, dictionary scanning, pruning, and
// trace simulation. Verifies that both paths produce identical results
// while timing them.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "dflab/campaign.hpp"

using namespace dflab;

static double time_ms(const std::function<void()> &fn) {
	auto t0 = std::chrono::steady_clock::now();
	fn();
	return std::chrono::duration<double, std::milli>(
	           std::chrono::steady_clock::now() - t0)
	    .count();
}

static void row(const char *name, double serial_ms, double parallel_ms,
                bool equal) {
	std::printf("%-22s serial %9.1f ms   omp %9.1f ms   speedup %.2fx   %s\n",
	            name, serial_ms, parallel_ms, serial_ms / parallel_ms,
	            equal ? "results equal" : "RESULTS DIFFER");
}

int main(int argc, char **argv) {
	int scale = argc > 1 ? std::atoi(argv[1]) : 1;
	std::printf("threads available: %d (scale %d)\n", omp_get_max_threads(),
	            scale);
	Rng master(424242);
	const CurveParams &curve = p256();
	const Profile &profile = profile_by_name("iwd-sae");
	bool all_equal = true;

	{
		int n = 400 * scale;
		std::vector<DerivationContext> ctxs;
		for (int i = 0; i < n; i++) {
			Rng setup = master.child(i).child(0);
			ctxs.push_back(DerivationContext::make(
			    profile, Identity::random_mac(setup), Identity::random_mac(setup),
			    setup.bytes(10), curve, Mode::Vulnerable));
		}
		std::vector<DerivationResult> serial, parallel;
		double ts = time_ms([&] { serial = derive_batch_serial(ctxs, master); });
		double tp = time_ms([&] { parallel = derive_batch(ctxs, master); });
		bool equal = serial.size() == parallel.size();
		for (size_t i = 0; equal && i < serial.size(); i++)
			equal = serial[i].element == parallel[i].element &&
			        serial[i].success_iteration == parallel[i].success_iteration;
		all_equal = all_equal && equal;
		row("derive_batch", ts, tp, equal);
	}

	{
		int n = 3000 * scale;
		std::vector<std::string> dict;
		for (int i = 0; i < n; i++)
			dict.push_back("entry" + std::to_string(i));
		Identity a = Identity::parse("aabbccddeeff");
		Identity b = Identity::parse("001122334455");
		std::vector<ScanHit> serial, parallel;
		double ts = time_ms(
		    [&] { serial = scan_high_iteration_serial(dict, a, b, curve, 3); });
		double tp = time_ms(
		    [&] { parallel = scan_high_iteration(dict, a, b, curve, 3); });
		bool equal = serial.size() == parallel.size();
		for (size_t i = 0; equal && i < serial.size(); i++)
			equal = serial[i].password == parallel[i].password &&
			        serial[i].success_iteration == parallel[i].success_iteration;
		all_equal = all_equal && equal;
		row("scan_high_iteration", ts, tp, equal);
	}

	{
		int n = 3000 * scale;
		std::vector<std::string> dict;
		for (int i = 0; i < n; i++)
			dict.push_back("cand" + std::to_string(i));
		Bytes victim{'b', 'e', 'n', 'c', 'h'};
		std::vector<Leak> leaks;
		for (int i = 0; i < 6; i++) {
			Rng lr = master.child(1000 + i);
			Leak leak;
			leak.id_a = Identity::random_mac(lr);
			leak.id_b = Identity::random_mac(lr);
			leak.k = *fast_success_iteration(Variant::Sae, leak.id_a, leak.id_b,
			                                 {}, victim, curve, 64);
			leaks.push_back(std::move(leak));
		}
		PruneOptions opts;
		opts.curve = &curve;
		PruneReport serial, parallel;
		double ts = time_ms(
		    [&] { serial = prune_dictionary_serial(dict, leaks, opts); });
		double tp =
		    time_ms([&] { parallel = prune_dictionary(dict, leaks, opts); });
		bool equal = serial.survivors == parallel.survivors &&
		             serial.eliminated_by_leak == parallel.eliminated_by_leak;
		all_equal = all_equal && equal;
		row("prune_dictionary", ts, tp, equal);
	}

	{
		int n = 150 * scale;
		std::vector<DerivationContext> ctxs;
		for (int i = 0; i < n; i++) {
			Rng setup = master.child(2000 + i).child(0);
			ctxs.push_back(DerivationContext::make(
			    profile, Identity::random_mac(setup), Identity::random_mac(setup),
			    setup.bytes(8), curve, Mode::Vulnerable));
		}
		NoiseModel noise = NoiseModel::sae_default();
		std::vector<Trace> serial, parallel;
		double ts = time_ms([&] {
			serial = simulate_trace_batch_serial(ctxs, 10, noise, master);
		});
		double tp = time_ms(
		    [&] { parallel = simulate_trace_batch(ctxs, 10, noise, master); });
		bool equal = traces_to_jsonl(serial) == traces_to_jsonl(parallel);
		all_equal = all_equal && equal;
		row("simulate_trace_batch", ts, tp, equal);
	}

	if (!all_equal) {
		std::printf("FAILURE: a parallel kernel diverged from its reference\n");
		return 1;
	}
	return 0;
}

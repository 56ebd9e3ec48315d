#include "dflab/dict_attack.hpp"

#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace dflab {

using nlohmann::json;

std::string leaks_to_jsonl(std::span<const Leak> leaks) {
	std::ostringstream out;
	for (const Leak &leak : leaks) {
		json j{{"idA", leak.id_a.display()},
		       {"idB", leak.id_b.display()},
		       {"k", leak.k},
		       {"kind", leak.kind == Leak::Kind::Exact ? "exact" : "at_least"}};
		if (leak.token)
			j["token"] = to_hex(*leak.token);
		out << j.dump() << "\n";
	}
	return out.str();
}

std::vector<Leak> leaks_from_jsonl(std::istream &in) {
	std::vector<Leak> leaks;
	std::string line;
	size_t line_no = 0;
	while (std::getline(in, line)) {
		line_no++;
		bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
		if (blank)
			continue;
		json j;
		try {
			j = json::parse(line);
		} catch (const json::parse_error &e) {
			throw std::runtime_error("leak file line " + std::to_string(line_no) +
			                         ": " + e.what());
		}
		Leak leak;
		Bytes a = from_hex(j.at("idA").get<std::string>());
		Bytes b = from_hex(j.at("idB").get<std::string>());
		leak.id_a = a.size() == 6 ? Identity::mac(a) : Identity::opaque(a);
		leak.id_b = b.size() == 6 ? Identity::mac(b) : Identity::opaque(b);
		leak.k = j.at("k").get<int>();
		std::string kind = j.at("kind").get<std::string>();
		if (kind == "exact")
			leak.kind = Leak::Kind::Exact;
		else if (kind == "at_least")
			leak.kind = Leak::Kind::AtLeast;
		else
			throw std::runtime_error("leak file line " + std::to_string(line_no) +
			                         ": unknown kind '" + kind + "'");
		if (leak.k < 1)
			throw std::runtime_error("leak file line " + std::to_string(line_no) +
			                         ": k must be >= 1");
		if (j.contains("token")) {
			Bytes raw = from_hex(j.at("token").get<std::string>());
			if (raw.size() != 4)
				throw std::runtime_error("leak file line " +
				                         std::to_string(line_no) +
				                         ": token must be 4 bytes");
			EapToken t;
			std::copy(raw.begin(), raw.end(), t.begin());
			leak.token = t;
		}
		leaks.push_back(std::move(leak));
	}
	return leaks;
}

double AttackModel::p_success(const CurveParams &curve) {
	mpq_class ratio(curve.q, 2 * curve.p);
	return ratio.get_d();
}

double AttackModel::pr_iteration(int k) const {
	if (k < 1)
		return 0.0;
	if (normalized_geometric)
		return std::pow(1.0 - p_s, k - 1) * p_s;
	return std::pow(p_s, k);
}

double AttackModel::pr_password_pruned_by_one_trace() const {
	double sum = 0;
	for (int k = 1; k <= k_max; k++) {
		double pk = pr_iteration(k);
		sum += pk * (1.0 - pk);
	}
	return sum;
}

double AttackModel::pr_pruned_within(int n) const {
	if (n <= 0)
		return 0.0;
	double p1 = pr_password_pruned_by_one_trace();
	return -std::expm1(static_cast<double>(n) * std::log1p(-p1));
}

// Upper binomial tail in log space; log_p/log_1mp are ln p_{y_n} and
// ln (1 - p_{y_n}).
static double binomial_upper_tail(double L, double d, double log_p,
                                  double log_1mp) {
	if (d <= 0.0)
		return 1.0;
	if (d > L)
		return 0.0;
	if (d == L)
		return std::exp(L * log_p);

	double lo = std::ceil(d);
	double range = L - lo + 1.0;
	constexpr double kExactLimit = 2.0e6;

	auto log_term = [&](double i) {
		return std::lgamma(L + 1.0) - std::lgamma(i + 1.0) -
		       std::lgamma(L - i + 1.0) + i * log_p + (L - i) * log_1mp;
	};

	if (range <= kExactLimit) {
		double sum = 0;
		for (double i = lo; i <= L; i += 1.0)
			sum += std::exp(log_term(i));
		return std::min(sum, 1.0);
	}
	if (lo <= kExactLimit) {
		// short complement: 1 - Pr[Z < d]
		double sum = 0;
		for (double i = 0; i < lo; i += 1.0)
			sum += std::exp(log_term(i));
		return std::clamp(1.0 - sum, 0.0, 1.0);
	}
	// far from both ends: normal approximation with continuity correction
	double p = std::exp(log_p);
	double mean = L * p;
	double var = L * p * (1.0 - p);
	if (var <= 0.0)
		return mean >= d ? 1.0 : 0.0;
	double z = (d - 0.5 - mean) / std::sqrt(2.0 * var);
	return 0.5 * std::erfc(z);
}

double AttackModel::pr_at_least_d_pruned(double L, double d, int n) const {
	if (L < 0 || d < 0 || d > L)
		throw std::invalid_argument("pr_at_least_d_pruned: need 0 <= d <= L");
	double p1 = pr_password_pruned_by_one_trace();
	double log_1mp = static_cast<double>(n) * std::log1p(-p1);
	double p = -std::expm1(log_1mp);
	double log_p;
	if (n <= 0)
		log_p = -std::numeric_limits<double>::infinity();
	else
		log_p = p < 1.0 ? std::log(p) : 0.0;
	return binomial_upper_tail(L, d, log_p, log_1mp);
}

static long min_traces(double L, double target_prob, double d,
                       double prune_prob_per_trace) {
	if (L <= 1.0)
		return 0; // a one-entry list is the answer already
	for (long n = 0; n <= 100000; n++) {
		double log_1mp = static_cast<double>(n) * std::log1p(-prune_prob_per_trace);
		double p = -std::expm1(log_1mp);
		double log_p = p < 1.0 ? std::log(p) : 0.0;
		if (n == 0)
			log_p = -std::numeric_limits<double>::infinity();
		if (binomial_upper_tail(L, d, log_p, log_1mp) >= target_prob)
			return n;
	}
	throw std::runtime_error("traces_required: target unreachable");
}

long AttackModel::traces_required(double L, double target_prob,
                                  std::optional<double> d) const {
	return min_traces(L, target_prob, d.value_or(L),
	                  pr_password_pruned_by_one_trace());
}

static long min_traces_expected(double L, double prune_prob) {
	if (L <= 1.0)
		return 0;
	// L * (1 - P1)^n <= 1
	double n = std::log(1.0 / L) / std::log1p(-prune_prob);
	return static_cast<long>(std::ceil(n - 1e-12));
}

long AttackModel::traces_required_expected_survivors(double L) const {
	return min_traces_expected(L, pr_password_pruned_by_one_trace());
}

double AttackModel::baseline_prune_prob_per_trace() const {
	// password passes iff its first-iteration outcome matches
	double match = p_s * p_s + (1.0 - p_s) * (1.0 - p_s);
	return 1.0 - match;
}

long AttackModel::baseline_traces_required(double L, double target_prob,
                                           std::optional<double> d) const {
	return min_traces(L, target_prob, d.value_or(L),
	                  baseline_prune_prob_per_trace());
}

long AttackModel::baseline_traces_required_expected_survivors(double L) const {
	return min_traces_expected(L, baseline_prune_prob_per_trace());
}

static bool consistent_with_leak(std::span<const uint8_t> password,
                                 const Leak &leak, Variant variant,
                                 const CurveParams &curve) {
	EapToken token = leak.token.value_or(EapToken{});
	// iterating past k is unnecessary: only the position relative to k
	// is compared
	std::optional<int> it = fast_success_iteration(variant, leak.id_a, leak.id_b,
	                                               token, password, curve, leak.k);
	if (leak.kind == Leak::Kind::Exact)
		return it.has_value() && *it == leak.k;
	return !it.has_value(); // needs more than k iterations
}

bool password_consistent_with_leaks(std::span<const uint8_t> password,
                                    const std::vector<Leak> &leaks,
                                    Variant variant, const CurveParams &curve) {
	for (const Leak &leak : leaks) {
		if (!consistent_with_leak(password, leak, variant, curve))
			return false;
	}
	return true;
}

// index of the first mismatching leak, or -1 when all match
static long first_mismatch(const std::string &password,
                           const std::vector<Leak> &leaks, Variant variant,
                           const CurveParams &curve) {
	Bytes pw(password.begin(), password.end());
	for (size_t li = 0; li < leaks.size(); li++) {
		if (!consistent_with_leak(pw, leaks[li], variant, curve))
			return static_cast<long>(li);
	}
	return -1;
}

static PruneReport prune_impl(const std::vector<std::string> &dictionary,
                              const std::vector<Leak> &leaks,
                              const PruneOptions &opts, bool parallel) {
	if (leaks.empty())
		throw std::invalid_argument("prune_dictionary: no leaks given");
	const CurveParams &curve = opts.curve ? *opts.curve : p256();

	auto start = std::chrono::steady_clock::now();
	std::vector<long> verdict(dictionary.size(), -1);
	long n = static_cast<long>(dictionary.size());
	if (parallel) {
#pragma omp parallel for schedule(dynamic, 64) \
    num_threads(opts.n_threads > 0 ? opts.n_threads : omp_get_max_threads())
		for (long i = 0; i < n; i++)
			verdict[i] = first_mismatch(dictionary[i], leaks, opts.variant, curve);
	} else {
		for (long i = 0; i < n; i++)
			verdict[i] = first_mismatch(dictionary[i], leaks, opts.variant, curve);
	}

	PruneReport report;
	report.input_size = dictionary.size();
	report.eliminated_by_leak.assign(leaks.size(), 0);
	for (size_t i = 0; i < dictionary.size(); i++) {
		if (verdict[i] < 0)
			report.survivors.push_back(dictionary[i]);
		else
			report.eliminated_by_leak[static_cast<size_t>(verdict[i])]++;
	}
	report.wall_clock_ms =
	    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
	                                              start)
	        .count();
	return report;
}

PruneReport prune_dictionary(const std::vector<std::string> &dictionary,
                             const std::vector<Leak> &leaks,
                             const PruneOptions &opts) {
	return prune_impl(dictionary, leaks, opts, true);
}

PruneReport prune_dictionary_serial(const std::vector<std::string> &dictionary,
                                    const std::vector<Leak> &leaks,
                                    const PruneOptions &opts) {
	return prune_impl(dictionary, leaks, opts, false);
}

} // namespace dflab

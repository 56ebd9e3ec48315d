#include "dflab/dragonfly_derive.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace dflab {

Identity Identity::mac(std::span<const uint8_t> six_bytes) {
	if (six_bytes.size() != 6)
		throw std::invalid_argument("MAC identity must be exactly 6 bytes");
	Identity id;
	id.kind = Kind::Mac;
	id.value.assign(six_bytes.begin(), six_bytes.end());
	return id;
}

Identity Identity::opaque(Bytes data) {
	Identity id;
	id.kind = Kind::Opaque;
	id.value = std::move(data);
	return id;
}

Identity Identity::parse(std::string_view text) {
	if (text.rfind("utf8:", 0) == 0) {
		std::string_view rest = text.substr(5);
		return opaque(Bytes(rest.begin(), rest.end()));
	}
	if (text.rfind("hex:", 0) == 0)
		return opaque(from_hex(text.substr(4)));
	if (text.rfind("mac:", 0) == 0)
		text = text.substr(4);

	std::string compact;
	bool colon_form = text.size() == 17;
	for (char c : text) {
		if (c == ':' || c == '-')
			continue;
		compact.push_back(c);
	}
	if (compact.size() == 12) {
		bool all_hex = true;
		for (char c : compact)
			all_hex = all_hex && std::isxdigit(static_cast<unsigned char>(c));
		if (all_hex && (colon_form || text.size() == 12)) {
			Bytes raw = from_hex(compact);
			return mac(raw);
		}
	}
	return opaque(Bytes(text.begin(), text.end()));
}

Identity Identity::random_mac(Rng &rng) {
	std::array<uint8_t, 6> raw{};
	rng.fill(raw);
	return mac(raw);
}

std::string Identity::display() const {
	return to_hex(value);
}

const Profile &profile_by_name(std::string_view name) {
	static const Profile iwd_sae{"iwd-sae", Variant::Sae, 20,
	                             "SAE Hunting and Pecking", "SAE-KCK-MK"};
	static const Profile rfc_sae{"rfc7664-sae", Variant::Sae, 40,
	                             "SAE Hunting and Pecking", "SAE-KCK-MK"};
	static const Profile eap_pwd{"eap-pwd", Variant::EapPwd, 40,
	                             "EAP-pwd Hunting And Pecking", "EAP-pwd-KCK-MK"};
	if (name == "iwd-sae")
		return iwd_sae;
	if (name == "rfc7664-sae")
		return rfc_sae;
	if (name == "eap-pwd")
		return eap_pwd;
	throw std::invalid_argument("unknown profile: " + std::string(name));
}

DerivationContext DerivationContext::make(const Profile &profile, Identity a,
                                          Identity b, Bytes password,
                                          const CurveParams &curve, Mode mode) {
	DerivationContext ctx;
	ctx.variant = profile.variant;
	ctx.mode = mode;
	ctx.id_a = std::move(a);
	ctx.id_b = std::move(b);
	ctx.password = std::move(password);
	ctx.curve = &curve;
	ctx.k_max = profile.k_max;
	return ctx;
}

static const std::string &kdf_label_for(Variant v) {
	static const std::string sae = "SAE Hunting and Pecking";
	static const std::string eap = "EAP-pwd Hunting And Pecking";
	return v == Variant::Sae ? sae : eap;
}

SeedValue seed_and_value(const DerivationContext &ctx,
                         std::span<const uint8_t> password_bytes, int counter) {
	if (counter < 1)
		throw std::invalid_argument("counter starts at 1");
	const CurveParams &curve = *ctx.curve;

	Bytes key;
	if (ctx.variant == Variant::Sae) {
		// symmetric: larger identity first
		const Bytes &a = ctx.id_a.value;
		const Bytes &b = ctx.id_b.value;
		if (compare_bytes(a, b) >= 0) {
			append(key, a);
			append(key, b);
		} else {
			append(key, b);
			append(key, a);
		}
	} else {
		append(key, ctx.token);
		append(key, ctx.id_a.value);
		append(key, ctx.id_b.value);
	}

	Bytes msg;
	append(msg, password_bytes);
	msg.push_back(static_cast<uint8_t>(counter & 0xff));

	SeedValue sv;
	sv.seed = hmac_sha256(key, msg);
	Bytes expanded = kdf_expand_bits(sv.seed, kdf_label_for(ctx.variant),
	                                 curve.bit_len);
	sv.value = bigint_from_bytes(expanded);
	sv.parity = sv.seed[31] & 1;
	sv.candidate_ok = sv.value < curve.p;
	return sv;
}

static void validate_ctx(const DerivationContext &ctx) {
	if (ctx.curve == nullptr)
		throw std::invalid_argument("derivation context has no curve");
	if (ctx.k_max < 1)
		throw std::invalid_argument("k_max must be >= 1");
	if (ctx.password.empty())
		throw std::invalid_argument("empty password");
}

static void emit(EventSink *sink, EventKind k) {
	if (sink)
		sink->emit(k);
}

// Root whose low bit matches the seed parity; the other root is p - s.
static BigInt pick_root(const BigInt &y_sqr, int parity, const BigInt &p) {
	BigInt y = sqrt_mod_p(y_sqr, p);
	bool odd = mpz_tstbit(y.get_mpz_t(), 0) != 0;
	if (y != 0 && odd != (parity != 0))
		y = p - y;
	return y;
}

static DerivationResult derive_vulnerable(const DerivationContext &ctx, Rng &rng,
                                          EventSink *sink) {
	const CurveParams &curve = *ctx.curve;
	BlindingState blind = make_blinding(curve, rng);
	for (int i = 0; i < blind.draws_used; i++)
		emit(sink, EventKind::RandomCall);

	DerivationResult res;
	bool found = false;
	BigInt sel_x, sel_ysqr;
	int sel_parity = 0;
	Bytes dummy;

	int limit = ctx.variant == Variant::Sae ? ctx.k_max : kEapIterationCeiling;
	for (int counter = 1; counter <= limit; counter++) {
		emit(sink, EventKind::IterationStart);
		const Bytes &base =
		    (ctx.variant == Variant::Sae && found) ? dummy : ctx.password;
		SeedValue sv = seed_and_value(ctx, base, counter);
		emit(sink, EventKind::KdfCall);

		int qr = 0;
		BigInt y_sqr;
		if (sv.candidate_ok) {
			y_sqr = curve.rhs(sv.value);
			emit(sink, EventKind::RandomCall); // blinding draw
			qr = legendre_blinded(y_sqr, curve, blind, rng);
			emit(sink, EventKind::QrTest);
		}

		bool first = false;
		if (qr == 1 && !found) {
			found = true;
			first = true;
			res.success_iteration = counter;
			sel_x = sv.value;
			sel_ysqr = y_sqr;
			sel_parity = sv.parity;
			emit(sink, EventKind::SuccessBlock);
			if (ctx.variant == Variant::Sae) {
				// replace the password for the remaining dummy
				// iterations; this draw is the success-specific
				// RNG call a spy keys on
				dummy = rng.bytes(ctx.password.size());
			}
		}
		res.outcome_log.push_back({counter, qr, first});
		res.iterations_executed = counter;
		if (ctx.variant == Variant::EapPwd && found)
			break;
	}

	if (found) {
		BigInt y = pick_root(sel_ysqr, sel_parity, curve.p);
		res.element = CurvePoint::affine(sel_x, y);
	}
	return res;
}

static DerivationResult derive_hardened(const DerivationContext &ctx, Rng &rng,
                                        EventSink *sink) {
	const CurveParams &curve = *ctx.curve;
	BlindingState blind = make_blinding(curve, rng);
	for (int i = 0; i < blind.draws_used; i++)
		emit(sink, EventKind::RandomCall);

	DerivationResult res;
	BigInt found = 0; // 0/1 mask
	BigInt sel_x = 0, sel_ysqr = 0;
	BigInt sel_parity = 0, sel_counter = 0;

	for (int counter = 1; counter <= ctx.k_max; counter++) {
		emit(sink, EventKind::IterationStart);
		SeedValue sv = seed_and_value(ctx, ctx.password, counter);
		emit(sink, EventKind::KdfCall);

		BigInt y_sqr = curve.rhs(sv.value % curve.p);
		emit(sink, EventKind::RandomCall);
		int qr = legendre_blinded(y_sqr, curve, blind, rng);
		emit(sink, EventKind::QrTest);

		// select the first success with the same arithmetic every pass
		BigInt is_res = (qr == 1 && sv.candidate_ok) ? 1 : 0;
		BigInt keep = (1 - found) * is_res;
		BigInt drop = 1 - keep;
		sel_x = sel_x * drop + sv.value * keep;
		sel_ysqr = sel_ysqr * drop + y_sqr * keep;
		sel_parity = sel_parity * drop + sv.parity * keep;
		sel_counter = sel_counter * drop + counter * keep;
		found = found + keep;
		emit(sink, EventKind::SuccessBlock);

		res.outcome_log.push_back(
		    {counter, sv.candidate_ok ? qr : 0, keep == 1});
		res.iterations_executed = counter;
	}

	// unconditional final square root; dummy input when nothing matched
	BigInt y = pick_root(found == 1 ? sel_ysqr : BigInt(0),
	                     static_cast<int>(sel_parity.get_si()), curve.p);
	if (found == 1) {
		res.success_iteration = static_cast<int>(sel_counter.get_si());
		res.element = CurvePoint::affine(sel_x, y);
	}
	return res;
}

DerivationResult derive_pwe(const DerivationContext &ctx, Rng &rng,
                            EventSink *sink) {
	validate_ctx(ctx);
	return ctx.mode == Mode::Hardened ? derive_hardened(ctx, rng, sink)
	                                  : derive_vulnerable(ctx, rng, sink);
}

std::vector<EventKind> operation_trace_fingerprint(const DerivationContext &ctx,
                                                   Rng &rng) {
	EventSink sink;
	derive_pwe(ctx, rng, &sink);
	auto first_iter = std::find(sink.events.begin(), sink.events.end(),
	                            EventKind::IterationStart);
	return {first_iter, sink.events.end()};
}

std::optional<int> fast_success_iteration(Variant variant, const Identity &id_a,
                                          const Identity &id_b,
                                          const EapToken &token,
                                          std::span<const uint8_t> password,
                                          const CurveParams &curve, int cap) {
	DerivationContext ctx;
	ctx.variant = variant;
	ctx.id_a = id_a;
	ctx.id_b = id_b;
	ctx.token = token;
	ctx.curve = &curve;
	for (int counter = 1; counter <= cap; counter++) {
		SeedValue sv = seed_and_value(ctx, password, counter);
		if (!sv.candidate_ok)
			continue;
		if (legendre_naive(curve.rhs(sv.value), curve.p) == 1)
			return counter;
	}
	return std::nullopt;
}

std::vector<ScanHit> scan_high_iteration_serial(
    const std::vector<std::string> &dictionary, const Identity &id_a,
    const Identity &id_b, const CurveParams &curve, int threshold) {
	if (threshold < 0)
		throw std::invalid_argument("threshold must be >= 0");
	std::vector<ScanHit> hits;
	for (const auto &pw : dictionary) {
		Bytes pwb(pw.begin(), pw.end());
		auto it = fast_success_iteration(Variant::Sae, id_a, id_b, {}, pwb,
		                                 curve, kEapIterationCeiling);
		if (!it || *it > threshold)
			hits.push_back({pw, it});
	}
	return hits;
}

std::vector<ScanHit> scan_high_iteration(const std::vector<std::string> &dictionary,
                                         const Identity &id_a, const Identity &id_b,
                                         const CurveParams &curve, int threshold,
                                         int n_threads) {
	if (threshold < 0)
		throw std::invalid_argument("threshold must be >= 0");
	std::vector<std::optional<int>> iters(dictionary.size());
	long n = static_cast<long>(dictionary.size());
#pragma omp parallel for schedule(dynamic, 64) \
    num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
	for (long i = 0; i < n; i++) {
		Bytes pwb(dictionary[i].begin(), dictionary[i].end());
		iters[i] = fast_success_iteration(Variant::Sae, id_a, id_b, {}, pwb,
		                                  curve, kEapIterationCeiling);
	}
	std::vector<ScanHit> hits;
	for (size_t i = 0; i < dictionary.size(); i++) {
		if (!iters[i] || *iters[i] > threshold)
			hits.push_back({dictionary[i], iters[i]});
	}
	return hits;
}

std::vector<DerivationResult> derive_batch_serial(
    const std::vector<DerivationContext> &ctxs, const Rng &master) {
	std::vector<DerivationResult> out(ctxs.size());
	for (size_t i = 0; i < ctxs.size(); i++) {
		Rng rng = master.child(i);
		out[i] = derive_pwe(ctxs[i], rng);
	}
	return out;
}

std::vector<DerivationResult> derive_batch(const std::vector<DerivationContext> &ctxs,
                                           const Rng &master, int n_threads) {
	std::vector<DerivationResult> out(ctxs.size());
	long n = static_cast<long>(ctxs.size());
#pragma omp parallel for schedule(dynamic, 16) \
    num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
	for (long i = 0; i < n; i++) {
		Rng rng = master.child(static_cast<uint64_t>(i));
		out[i] = derive_pwe(ctxs[i], rng);
	}
	return out;
}

} // namespace dflab

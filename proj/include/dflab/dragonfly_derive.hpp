#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dflab/ec_core.hpp"
#include "dflab/kdf.hpp"
#include "dflab/rng.hpp"

namespace dflab {

struct Identity {
	enum class Kind { Mac, Opaque };
	Kind kind = Kind::Opaque;
	Bytes value;

	static Identity mac(std::span<const uint8_t> six_bytes);
	static Identity opaque(Bytes data);
	// Accepts "aa:bb:cc:dd:ee:ff", 12 hex digits, "hex:..." or plain
	// UTF-8 (prefix "utf8:" forces it).
	static Identity parse(std::string_view text);
	static Identity random_mac(Rng &rng);

	std::string display() const;
	bool operator==(const Identity &o) const {
		return kind == o.kind && value == o.value;
	}
};

enum class Variant { Sae, EapPwd };
enum class Mode { Vulnerable, Hardened };

using EapToken = std::array<uint8_t, 4>;

/**
 * Named parameter sets selectable from the CLI:
 *   iwd-sae      SAE with the 20-iteration loop cap
 *   rfc7664-sae  SAE with the recommended 40-iteration cap
 *   eap-pwd      server-token variant; the vulnerable loop exits early
 */
struct Profile {
	std::string name;
	Variant variant = Variant::Sae;
	int k_max = 20;
	std::string kdf_label;     // hunting-and-pecking expansion label
	std::string confirm_label; // key-derivation label for the handshake
};

const Profile &profile_by_name(std::string_view name);

struct DerivationContext {
	Variant variant = Variant::Sae;
	Mode mode = Mode::Vulnerable;
	Identity id_a;
	Identity id_b;
	EapToken token{}; // used only when variant == EapPwd
	Bytes password;
	const CurveParams *curve = nullptr;
	int k_max = 20;

	static DerivationContext make(const Profile &profile, Identity a, Identity b,
	                              Bytes password, const CurveParams &curve,
	                              Mode mode);
};

// Abstract observables in execution order; what a cache spy can key on.
enum class EventKind : uint8_t {
	IterationStart,
	KdfCall,
	RandomCall,
	QrTest,
	SuccessBlock,
};

struct EventSink {
	std::vector<EventKind> events;
	void emit(EventKind k) { events.push_back(k); }
};

struct IterationOutcome {
	int counter = 0;
	// +1 residue, -1 non-residue, 0 candidate rejected (value >= p)
	int qr_test_result = 0;
	bool was_first_success = false;
};

struct DerivationResult {
	CurvePoint element; // infinity when not found
	std::optional<int> success_iteration;
	int iterations_executed = 0;
	std::vector<IterationOutcome> outcome_log;
};

struct SeedValue {
	Digest seed{};
	BigInt value;
	int parity = 0;
	bool candidate_ok = false; // value < p
};

// One hunting-and-pecking step: seed = keyed hash over identities,
// password and counter; value = expansion of the seed to the width of
// p. SAE keys the hash with max(id)||min(id), so the result is
// symmetric in the two identities; EAP-pwd keys it with
// token||id_a||id_b.
SeedValue seed_and_value(const DerivationContext &ctx,
                         std::span<const uint8_t> password_bytes, int counter);

// The vulnerable EAP-pwd loop has no iteration cap; this ceiling only
// guarantees termination.
inline constexpr int kEapIterationCeiling = 256;

/**
 * Password-to-curve conversion.
 *
 * Vulnerable SAE runs exactly k_max iterations, switching to a random
 * dummy string once the element is found. Vulnerable EAP-pwd returns
 * at the first success. Hardened runs exactly k_max iterations over
 * the real password with masked first-success selection, so the
 * operation-kind sequence does not depend on the password.
 */
DerivationResult derive_pwe(const DerivationContext &ctx, Rng &rng,
                            EventSink *sink = nullptr);

// Event-kind sequence of the conversion loop (first IterationStart
// onward), data stripped. The pre-loop blinding draws are excluded:
// their count is session randomness, not a function of the inputs.
std::vector<EventKind> operation_trace_fingerprint(const DerivationContext &ctx,
                                                   Rng &rng);

// Attacker-side recomputation: success index with the plain residue
// test and early exit, capped at `cap` iterations. nullopt = no
// success within cap. Observationally equal to derive_pwe's
// success_iteration whenever that is <= cap.
std::optional<int> fast_success_iteration(Variant variant, const Identity &id_a,
                                          const Identity &id_b,
                                          const EapToken &token,
                                          std::span<const uint8_t> password,
                                          const CurveParams &curve, int cap);

struct ScanHit {
	std::string password;
	std::optional<int> success_iteration; // nullopt: none within ceiling
};

// Dictionary entries needing more than `threshold` iterations under
// (id_a, id_b). OpenMP over the dictionary; identical output to the
// serial reference.
std::vector<ScanHit> scan_high_iteration(const std::vector<std::string> &dictionary,
                                         const Identity &id_a, const Identity &id_b,
                                         const CurveParams &curve, int threshold,
                                         int n_threads = 0);
std::vector<ScanHit> scan_high_iteration_serial(
    const std::vector<std::string> &dictionary, const Identity &id_a,
    const Identity &id_b, const CurveParams &curve, int threshold);

// Independent derivations, one child rng stream per index. OpenMP;
// bitwise-identical to the serial reference.
std::vector<DerivationResult> derive_batch(const std::vector<DerivationContext> &ctxs,
                                           const Rng &master, int n_threads = 0);
std::vector<DerivationResult> derive_batch_serial(
    const std::vector<DerivationContext> &ctxs, const Rng &master);

} // namespace dflab

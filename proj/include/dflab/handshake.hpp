#pragma once

#include <optional>

#include "dflab/dragonfly_derive.hpp"

namespace dflab {

struct CommitFrame {
	BigInt scalar;     // s = r + m mod q
	CurvePoint element; // Q = -m * P
};

struct ConfirmFrame {
	std::array<uint8_t, 32> tag{};
};

enum class HandshakePhase { Init, Committed, Confirmed, Failed };

enum class HandshakeError {
	None,
	OutOfBoundsScalar,
	ElementNotOnGroup,
	DegenerateSharedSecret,
	ConfirmMismatch,
	WrongPhase,
};

const char *handshake_error_name(HandshakeError e);

// Fixed-width wire encodings: scalar is curve.byte_len big-endian,
// points are uncompressed 0x04 || x || y, confirm is the raw 32-byte
// tag.
Bytes encode_commit(const CurveParams &curve, const CommitFrame &frame);
CommitFrame decode_commit(const CurveParams &curve, std::span<const uint8_t> wire);
Bytes encode_confirm(const ConfirmFrame &frame);
ConfirmFrame decode_confirm(std::span<const uint8_t> wire);

/**
 * One side of the commit/confirm exchange. Both parties run the same
 * code; there is no initiator role.
 */
class PartyState {
public:
	PartyState(Identity self, Identity peer, const Profile &profile,
	           const CurveParams &curve, CurvePoint pwe);

	// Draws r, m in [2, q), forms s = r + m mod q and Q = -m*P.
	CommitFrame make_commit(Rng &rng);
	// Validates the peer frame, computes the shared point
	// r * (s_peer*P + Q_peer) and derives kck || mk from its
	// x-coordinate.
	HandshakeError process_commit(const CommitFrame &frame);
	ConfirmFrame make_confirm() const;
	bool verify_confirm(const ConfirmFrame &frame);

	HandshakePhase phase() const { return phase_; }
	const std::array<uint8_t, 32> &kck() const { return kck_; }
	const std::array<uint8_t, 32> &mk() const { return mk_; }
	const BigInt &shared_x() const { return shared_x_; }

	// test hook: pin r and m before make_commit
	void force_secrets(BigInt r, BigInt m);

private:
	Identity self_;
	Identity peer_;
	const Profile *profile_;
	const CurveParams *curve_;
	CurvePoint pwe_;
	BigInt r_, m_;
	std::optional<std::pair<BigInt, BigInt>> forced_;
	CommitFrame sent_{};
	CommitFrame received_{};
	BigInt shared_x_;
	std::array<uint8_t, 32> kck_{}, mk_{};
	HandshakePhase phase_ = HandshakePhase::Init;

	Bytes transcript() const;
};

enum class HandshakeOutcome {
	Success,
	DerivationFailed,
	CommitRejected,
	ConfirmFailed,
};

struct HandshakeReport {
	HandshakeOutcome outcome = HandshakeOutcome::ConfirmFailed;
	HandshakeError error_a = HandshakeError::None;
	HandshakeError error_b = HandshakeError::None;
	std::array<uint8_t, 32> mk_a{}, mk_b{};
	bool keys_match = false;
};

// Drives two in-process parties over an ordered in-memory channel.
// Success iff both passwords derive, frames validate and both confirm
// tags verify.
HandshakeReport run_handshake(const Bytes &pw_a, const Bytes &pw_b,
                              const Identity &id_a, const Identity &id_b,
                              const Profile &profile, const CurveParams &curve,
                              Rng &rng);

} // namespace dflab

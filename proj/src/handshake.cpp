#include "dflab/handshake.hpp"

#include <algorithm>
#include <stdexcept>

namespace dflab {

const char *handshake_error_name(HandshakeError e) {
	switch (e) {
	case HandshakeError::None: return "none";
	case HandshakeError::OutOfBoundsScalar: return "out-of-bounds-scalar";
	case HandshakeError::ElementNotOnGroup: return "element-not-on-group";
	case HandshakeError::DegenerateSharedSecret: return "degenerate-shared-secret";
	case HandshakeError::ConfirmMismatch: return "confirm-mismatch";
	case HandshakeError::WrongPhase: return "wrong-phase";
	}
	return "unknown";
}

Bytes encode_commit(const CurveParams &curve, const CommitFrame &frame) {
	Bytes out = bigint_to_fixed_bytes(frame.scalar, curve.byte_len);
	out.push_back(0x04);
	Bytes x = bigint_to_fixed_bytes(frame.element.x, curve.byte_len);
	Bytes y = bigint_to_fixed_bytes(frame.element.y, curve.byte_len);
	append(out, x);
	append(out, y);
	return out;
}

CommitFrame decode_commit(const CurveParams &curve, std::span<const uint8_t> wire) {
	size_t n = curve.byte_len;
	if (wire.size() != 3 * n + 1 || wire[n] != 0x04)
		throw std::invalid_argument("malformed commit frame");
	CommitFrame f;
	f.scalar = bigint_from_bytes(wire.subspan(0, n));
	f.element = CurvePoint::affine(bigint_from_bytes(wire.subspan(n + 1, n)),
	                               bigint_from_bytes(wire.subspan(2 * n + 1, n)));
	return f;
}

Bytes encode_confirm(const ConfirmFrame &frame) {
	return Bytes(frame.tag.begin(), frame.tag.end());
}

ConfirmFrame decode_confirm(std::span<const uint8_t> wire) {
	if (wire.size() != 32)
		throw std::invalid_argument("malformed confirm frame");
	ConfirmFrame f;
	std::copy(wire.begin(), wire.end(), f.tag.begin());
	return f;
}

PartyState::PartyState(Identity self, Identity peer, const Profile &profile,
                       const CurveParams &curve, CurvePoint pwe)
    : self_(std::move(self)), peer_(std::move(peer)), profile_(&profile),
      curve_(&curve), pwe_(std::move(pwe)) {
	if (!is_on_curve(curve, pwe_) || pwe_.inf)
		throw std::invalid_argument("password element not on curve");
}

void PartyState::force_secrets(BigInt r, BigInt m) {
	forced_ = std::make_pair(std::move(r), std::move(m));
}

CommitFrame PartyState::make_commit(Rng &rng) {
	if (phase_ != HandshakePhase::Init)
		throw std::logic_error("make_commit: not in Init phase");
	const BigInt &q = curve_->q;
	for (;;) {
		if (forced_) {
			r_ = forced_->first;
			m_ = forced_->second;
		} else {
			r_ = rand_below(q - 2, rng) + 2;
			m_ = rand_below(q - 2, rng) + 2;
		}
		BigInt s = (r_ + m_) % q;
		// s itself must satisfy the peer's bounds check; a sum
		// landing in {0, 1} is astronomically rare, redraw
		if (s >= 2 || forced_) {
			sent_.scalar = s;
			break;
		}
	}
	sent_.element = point_negate(*curve_, scalar_mul(*curve_, m_, pwe_));
	phase_ = HandshakePhase::Committed;
	return sent_;
}

Bytes PartyState::transcript() const {
	// canonical order: frame of the smaller identity first, so both
	// sides serialize identically
	Bytes mine = encode_commit(*curve_, sent_);
	Bytes theirs = encode_commit(*curve_, received_);
	const Bytes *first = &mine;
	const Bytes *second = &theirs;
	if (compare_bytes(self_.value, peer_.value) > 0)
		std::swap(first, second);
	Bytes t;
	put_be32(t, static_cast<uint32_t>(first->size()));
	append(t, *first);
	put_be32(t, static_cast<uint32_t>(second->size()));
	append(t, *second);
	return t;
}

HandshakeError PartyState::process_commit(const CommitFrame &frame) {
	if (phase_ != HandshakePhase::Committed) {
		phase_ = HandshakePhase::Failed;
		return HandshakeError::WrongPhase;
	}
	if (frame.scalar < 2 || frame.scalar >= curve_->q) {
		phase_ = HandshakePhase::Failed;
		return HandshakeError::OutOfBoundsScalar;
	}
	if (frame.element.inf || !is_on_curve(*curve_, frame.element)) {
		phase_ = HandshakePhase::Failed;
		return HandshakeError::ElementNotOnGroup;
	}
	received_ = frame;

	// K = r * (s_peer * P + Q_peer) = r * r_peer * P
	CurvePoint k = point_add(*curve_, scalar_mul(*curve_, frame.scalar, pwe_),
	                         frame.element);
	k = scalar_mul(*curve_, r_, k);
	if (k.inf) {
		phase_ = HandshakePhase::Failed;
		return HandshakeError::DegenerateSharedSecret;
	}
	shared_x_ = k.x;

	Bytes xb = bigint_to_fixed_bytes(shared_x_, curve_->byte_len);
	Digest seed = sha256(xb);
	Bytes keys = kdf_expand_bits(seed, profile_->confirm_label, 512);
	std::copy_n(keys.begin(), 32, kck_.begin());
	std::copy_n(keys.begin() + 32, 32, mk_.begin());
	return HandshakeError::None;
}

ConfirmFrame PartyState::make_confirm() const {
	if (phase_ != HandshakePhase::Committed && phase_ != HandshakePhase::Confirmed)
		throw std::logic_error("make_confirm: commit phase incomplete");
	ConfirmFrame f;
	Digest d = hmac_sha256(kck_, transcript());
	std::copy(d.begin(), d.end(), f.tag.begin());
	return f;
}

bool PartyState::verify_confirm(const ConfirmFrame &frame) {
	if (phase_ != HandshakePhase::Committed)
		return false;
	ConfirmFrame expect = make_confirm();
	if (!equal_constant_time(expect.tag, frame.tag)) {
		phase_ = HandshakePhase::Failed;
		return false;
	}
	phase_ = HandshakePhase::Confirmed;
	return true;
}

HandshakeReport run_handshake(const Bytes &pw_a, const Bytes &pw_b,
                              const Identity &id_a, const Identity &id_b,
                              const Profile &profile, const CurveParams &curve,
                              Rng &rng) {
	HandshakeReport report;

	DerivationContext ctx_a = DerivationContext::make(profile, id_a, id_b, pw_a,
	                                                  curve, Mode::Hardened);
	DerivationContext ctx_b = DerivationContext::make(profile, id_a, id_b, pw_b,
	                                                  curve, Mode::Hardened);
	Rng rng_da = rng.child(1), rng_db = rng.child(2);
	DerivationResult der_a = derive_pwe(ctx_a, rng_da);
	DerivationResult der_b = derive_pwe(ctx_b, rng_db);
	if (!der_a.success_iteration || !der_b.success_iteration) {
		report.outcome = HandshakeOutcome::DerivationFailed;
		return report;
	}

	PartyState a(id_a, id_b, profile, curve, der_a.element);
	PartyState b(id_b, id_a, profile, curve, der_b.element);

	Rng rng_a = rng.child(3), rng_b = rng.child(4);
	CommitFrame commit_a = a.make_commit(rng_a);
	CommitFrame commit_b = b.make_commit(rng_b);

	// frames cross the channel as bytes
	CommitFrame rx_b = decode_commit(curve, encode_commit(curve, commit_a));
	CommitFrame rx_a = decode_commit(curve, encode_commit(curve, commit_b));
	report.error_a = a.process_commit(rx_a);
	report.error_b = b.process_commit(rx_b);
	if (report.error_a != HandshakeError::None ||
	    report.error_b != HandshakeError::None) {
		report.outcome = HandshakeOutcome::CommitRejected;
		return report;
	}

	ConfirmFrame confirm_a = a.make_confirm();
	ConfirmFrame confirm_b = b.make_confirm();
	bool ok_a = a.verify_confirm(decode_confirm(encode_confirm(confirm_b)));
	bool ok_b = b.verify_confirm(decode_confirm(encode_confirm(confirm_a)));

	report.mk_a = a.mk();
	report.mk_b = b.mk();
	report.keys_match = equal_constant_time(report.mk_a, report.mk_b);
	if (ok_a && ok_b) {
		report.outcome = HandshakeOutcome::Success;
	} else {
		report.outcome = HandshakeOutcome::ConfirmFailed;
		if (!ok_a)
			report.error_a = HandshakeError::ConfirmMismatch;
		if (!ok_b)
			report.error_b = HandshakeError::ConfirmMismatch;
	}
	return report;
}

} // namespace dflab

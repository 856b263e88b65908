"""Auditing of location-history claims against revealed provenance.

The auditor receives an ordered list of location claims plus the matching
revealed subsequence and checks, per claim: the authority's proof
signature; every endorsement (witness signature, authority timestamp
signature, digest binding, field agreement, timestamp window); that the
claimed location matches the proof (exactly, or through a verified
granularity opening for blinded statements); that the claimed time equals
the proof's visit time; and, when an epoch registry is available, that the
proof's digest is included in the published report for the epoch its
timestamp falls in. Chronological order of the whole presentation is then
delegated to the active ordering scheme's verifier.

Verdicts separate what failed so that failures can be mapped back onto the
threat taxonomy (``classify_failure``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .bloom import bloom_order_verify
from .crypto import CryptoProfile
from .epochs import EpochRegistry, RegistryError, check_inclusion
from .hashchain import chain_verify_subsequence
from .model import (
    LocationStatement,
    OrderingVerdict,
    PrivateLocationStatement,
    RevealedEntry,
    RevealedSubsequence,
    TimestampAttestation,
    ValidationError,
    SCHEME_BLOOM,
    SCHEME_HASHCHAIN,
    canonical_encode,
    proof_digest,
    statement_signing_bytes,
    ORDER_INCOMPLETE,
)

CLAIM_OK = "OK"
CLAIM_BAD_SIGNATURE = "BadSignature"
CLAIM_ENDORSEMENT_MISMATCH = "EndorsementMismatch"
CLAIM_GRANULARITY_MISMATCH = "GranularityMismatch"
CLAIM_EPOCH_MISSING = "EpochMissing"
CLAIM_EPOCH_EXCLUDED = "EpochExcluded"
CLAIM_TIME_MISMATCH = "TimeMismatch"


@dataclass(frozen=True)
class LocationClaim:
    location_id: str  # at whatever granularity the user chose to reveal
    visit_time: int


@dataclass(frozen=True)
class ClaimVerdict:
    index: int
    status: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status == CLAIM_OK


@dataclass(frozen=True)
class AuditReport:
    claim_verdicts: tuple[ClaimVerdict, ...]
    ordering: OrderingVerdict
    signatures_verified: int
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.claim_verdicts) and self.ordering.ok

    def failures(self) -> list[ClaimVerdict]:
        return [v for v in self.claim_verdicts if not v.ok]


class _Tally:
    def __init__(self):
        self.count = 0

    def verify(self, profile: CryptoProfile, public_key, message, sig) -> bool:
        self.count += 1
        return profile.verify(public_key, message, sig)


def audit(
    profile: CryptoProfile,
    claims: Sequence[LocationClaim],
    sub: RevealedSubsequence,
    pubkeys: Mapping[str, bytes],
    registry: Optional[EpochRegistry] = None,
    *,
    endorsement_window_ms: int = 60_000,
    epoch_len_ms: int = 300_000,
) -> AuditReport:
    """Audit claims against a revealed subsequence.

    ``claims[i]`` is checked against ``sub.entries[i]``; a count mismatch is
    a structural malformation and yields an Incomplete report. Without a
    registry the epoch check is skipped with a warning so that chains from
    deployments without published reports remain auditable.
    """
    warnings: list[str] = []
    tally = _Tally()

    if len(claims) != len(sub.entries):
        return AuditReport(
            claim_verdicts=(),
            ordering=OrderingVerdict(
                status=ORDER_INCOMPLETE,
                detail=(f"{len(claims)} claims for {len(sub.entries)} "
                        "revealed entries")),
            signatures_verified=0,
        )
    if registry is None:
        warnings.append("no epoch registry supplied; epoch inclusion not checked")

    verdicts = tuple(
        _audit_claim(profile, i, claim, revealed, pubkeys, registry,
                     endorsement_window_ms, epoch_len_ms, tally)
        for i, (claim, revealed) in enumerate(zip(claims, sub.entries))
    )

    if sub.scheme == SCHEME_HASHCHAIN:
        ordering = chain_verify_subsequence(profile, sub, pubkeys)
    elif sub.scheme == SCHEME_BLOOM:
        ordering = bloom_order_verify(profile, sub, pubkeys)
    else:
        raise ValidationError(f"unknown ordering scheme {sub.scheme!r}")

    return AuditReport(
        claim_verdicts=verdicts,
        ordering=ordering,
        signatures_verified=tally.count + ordering.signatures_verified,
        warnings=tuple(warnings),
    )


def _audit_claim(
    profile: CryptoProfile,
    index: int,
    claim: LocationClaim,
    revealed: RevealedEntry,
    pubkeys: Mapping[str, bytes],
    registry: Optional[EpochRegistry],
    window_ms: int,
    epoch_len_ms: int,
    tally: _Tally,
) -> ClaimVerdict:
    lp = revealed.entry.elp.proof
    stmt = lp.statement
    issuer = stmt.location_id

    def fail(status: str, detail: str) -> ClaimVerdict:
        return ClaimVerdict(index=index, status=status, detail=detail)

    # Proof signature.
    issuer_key = pubkeys.get(issuer)
    if issuer_key is None:
        return fail(CLAIM_BAD_SIGNATURE, f"unknown issuer {issuer!r}")
    if not tally.verify(profile, issuer_key, statement_signing_bytes(stmt),
                        lp.authority_sig):
        return fail(CLAIM_BAD_SIGNATURE, "authority signature invalid")

    # Endorsements.
    if not revealed.entry.elp.endorsements:
        return fail(CLAIM_ENDORSEMENT_MISMATCH, "no endorsements")
    expected_digest = proof_digest(profile, lp)
    for endorsement in revealed.entry.elp.endorsements:
        es = endorsement.statement
        # Structural binding first: a digest or field mismatch means the
        # endorsement belongs to some other proof, whoever signed it.
        if es.proof_digest != expected_digest:
            return fail(CLAIM_ENDORSEMENT_MISMATCH,
                        "digest: endorsement refers to a different proof")
        if (es.user_id, es.location_id, es.visit_time) != (
                stmt.user_id, stmt.location_id, stmt.visit_time):
            return fail(CLAIM_ENDORSEMENT_MISMATCH,
                        "fields: endorsement disagrees with the proof")
        witness_key = pubkeys.get(es.witness_id)
        if witness_key is None:
            return fail(CLAIM_BAD_SIGNATURE,
                        f"unknown witness {es.witness_id!r}")
        if not tally.verify(profile, witness_key, canonical_encode(es),
                            endorsement.witness_sig):
            return fail(CLAIM_BAD_SIGNATURE, "witness signature invalid")
        attestation = TimestampAttestation(es.proof_digest, es.endorsed_at)
        if not tally.verify(profile, issuer_key, canonical_encode(attestation),
                            endorsement.authority_time_sig):
            return fail(CLAIM_BAD_SIGNATURE, "timestamp signature invalid")
        if not stmt.visit_time <= es.endorsed_at <= stmt.visit_time + window_ms:
            return fail(CLAIM_TIME_MISMATCH,
                        "endorsement-window: timestamp outside window")

    # Location claim at the revealed granularity.
    granularity_verdict = _check_location_claim(profile, claim, stmt, revealed)
    if granularity_verdict is not None:
        return ClaimVerdict(index=index, status=CLAIM_GRANULARITY_MISMATCH,
                            detail=granularity_verdict)

    # Visit-time claim is exact: the time comes from the proof itself, so
    # any disagreement is a false claim, not clock skew.
    if claim.visit_time != stmt.visit_time:
        return fail(CLAIM_TIME_MISMATCH,
                    f"claim-time: claimed {claim.visit_time}, "
                    f"proof says {stmt.visit_time}")

    # Epoch inclusion.
    if registry is not None:
        report = registry.lookup(issuer, stmt.visit_time)
        if report is None:
            return fail(CLAIM_EPOCH_MISSING,
                        f"no epoch report covers t={stmt.visit_time} "
                        f"at {issuer!r}")
        try:
            tally.count += 1
            included = check_inclusion(profile, issuer_key, report, lp)
        except RegistryError as exc:
            return fail(CLAIM_BAD_SIGNATURE, f"epoch report: {exc}")
        if not included:
            return fail(CLAIM_EPOCH_EXCLUDED,
                        f"digest absent from epoch {report.epoch_id} report")

    return ClaimVerdict(index=index, status=CLAIM_OK)


def _check_location_claim(profile: CryptoProfile, claim: LocationClaim,
                          stmt, revealed: RevealedEntry) -> Optional[str]:
    """None when the claimed location is supported; else a failure detail."""
    if isinstance(stmt, LocationStatement):
        if claim.location_id != stmt.location_id:
            return (f"claimed {claim.location_id!r}, proof names "
                    f"{stmt.location_id!r}")
        return None
    assert isinstance(stmt, PrivateLocationStatement)
    # Blinded statement: the claim must match a disclosed opening that
    # verifies against its commitment. Unrevealed openings are never read.
    for index, value, nonce in revealed.disclosed:
        if not 1 <= index <= len(stmt.commitments):
            return f"disclosed index {index} out of range"
        if value != claim.location_id:
            continue
        if profile.verify_commitment(stmt.commitments[index - 1],
                                     value.encode("utf-8"), nonce):
            return None
        return f"opening for {value!r} does not match its commitment"
    return f"no verified opening for claimed granularity {claim.location_id!r}"


# ---------------------------------------------------------------------------
# Threat classification
# ---------------------------------------------------------------------------

LABEL_FALSE_PRESENCE = "false-presence"
LABEL_PROOF_SWITCHING = "proof-switching"
LABEL_FALSE_ENDORSEMENT = "false-endorsement"
LABEL_FALSE_TIME = "backdating/future-dating"
LABEL_REORDERING = "reordering"
LABEL_UNCLASSIFIED = "unclassified"


def classify_failure(report: AuditReport) -> str:
    """Map a failed report onto the threat taxonomy.

    Precedence runs from forgery outward: invalid signatures mean outright
    fabrication; a digest mismatch means a genuine proof was rebound
    (proof switching); endorsement field or window trouble points at the
    witness; epoch exclusion at timestamp manipulation; and a pure
    ordering failure at reordering.
    """
    if report.ok:
        raise ValidationError("cannot classify a fully passing report")
    statuses = {v.status for v in report.failures()}
    details = [v.detail for v in report.failures()]
    if CLAIM_BAD_SIGNATURE in statuses:
        return LABEL_FALSE_PRESENCE
    if CLAIM_ENDORSEMENT_MISMATCH in statuses:
        if any(d.startswith("digest:") for d in details):
            return LABEL_PROOF_SWITCHING
        if any(d.startswith("fields:") for d in details):
            return LABEL_FALSE_ENDORSEMENT
        return LABEL_PROOF_SWITCHING
    if CLAIM_TIME_MISMATCH in statuses and any(
            d.startswith("endorsement-window:") for d in details):
        return LABEL_FALSE_ENDORSEMENT
    if CLAIM_EPOCH_EXCLUDED in statuses or CLAIM_EPOCH_MISSING in statuses:
        return LABEL_FALSE_TIME
    if not report.ordering.ok:
        return LABEL_REORDERING
    return LABEL_UNCLASSIFIED


def render_text_report(report: AuditReport) -> str:
    """Human-readable audit summary."""
    lines = []
    verdict = "PASS" if report.ok else "FAIL"
    lines.append(f"audit result: {verdict}")
    for v in report.claim_verdicts:
        suffix = f" ({v.detail})" if v.detail else ""
        lines.append(f"  claim {v.index + 1}: {v.status}{suffix}")
    o = report.ordering
    detail = f" ({o.detail})" if o.detail else ""
    lines.append(f"  ordering: {o.status}{detail}")
    lines.append(
        f"  checks: signatures={report.signatures_verified} "
        f"links={o.links_checked} accumulators={o.accumulators_checked}")
    for w in report.warnings:
        lines.append(f"  warning: {w}")
    if not report.ok:
        lines.append(f"  threat class: {classify_failure(report)}")
    return "\n".join(lines)

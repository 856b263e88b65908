"""Per-location epoch reports: signed accumulators of issued-proof digests.

At the end of every fixed-length epoch a location authority publishes a
signed Bloom accumulator over the digests of all proofs it issued during
that epoch. Auditors use the reports to pin a proof's claimed visit time
to the window in which it was actually issued: a proof whose timestamp
falls in an epoch whose published report does not contain its digest was
minted at some other time (backdated or future-dated).

Reports expose digests only; recovering identities from a report requires
the preimage proof. The registry is an append-only trusted store: once a
report for (location, epoch) is published it cannot be replaced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .bloom import (
    bloom_contains,
    bloom_insert,
    bloom_new,
    bloom_well_formed,
    sign_accumulator,
)
from .crypto import CryptoProfile, Digest, KeyPair, Signature
from .model import (
    BloomAccumulator,
    LocationProof,
    ValidationError,
    bloom_signing_bytes,
    proof_digest,
)


class RegistryError(ValidationError):
    """Violation of registry append-only or report integrity rules."""


TAG_EPOCH_REPORT = 0x1D


@dataclass(frozen=True)
class EpochReport:
    location_id: str
    epoch_id: int
    start: int  # authority-local ms, inclusive
    end: int    # exclusive
    accumulator: BloomAccumulator
    report_sig: Optional[Signature] = None


def epoch_of(t: int, epoch_len_ms: int) -> int:
    return t // epoch_len_ms


def epoch_bounds(epoch_id: int, epoch_len_ms: int) -> tuple[int, int]:
    return epoch_id * epoch_len_ms, (epoch_id + 1) * epoch_len_ms


def report_signing_bytes(report: EpochReport) -> bytes:
    loc = report.location_id.encode("utf-8")
    return (
        bytes([TAG_EPOCH_REPORT])
        + len(loc).to_bytes(4, "big") + loc
        + report.epoch_id.to_bytes(8, "big")
        + report.start.to_bytes(8, "big")
        + report.end.to_bytes(8, "big")
        + bloom_signing_bytes(report.accumulator)
    )


def build_epoch_report(
    profile: CryptoProfile,
    authority_keys: KeyPair,
    location_id: str,
    epoch_id: int,
    epoch_len_ms: int,
    digests: Iterable[Digest],
    capacity: int = 4096,
    target_fpr: float = 0.001,
) -> EpochReport:
    """Accumulate an epoch's issued-proof digests and sign the report."""
    acc = bloom_new(capacity, target_fpr)
    for d in digests:
        acc = bloom_insert(profile, acc, d)
    acc = sign_accumulator(profile, authority_keys, acc)
    start, end = epoch_bounds(epoch_id, epoch_len_ms)
    report = EpochReport(location_id, epoch_id, start, end, acc)
    sig = profile.sign(authority_keys.private_key, report_signing_bytes(report))
    return replace(report, report_sig=sig)


def verify_report(profile: CryptoProfile, public_key: bytes,
                  report: EpochReport) -> bool:
    if report.report_sig is None:
        return False
    return profile.verify(public_key, report_signing_bytes(report),
                          report.report_sig)


def check_inclusion(profile: CryptoProfile, public_key: bytes,
                    report: EpochReport, lp: LocationProof) -> bool:
    """True iff the proof's digest is a member of the report accumulator.

    The report signature must verify first; a report that does not is no
    evidence either way. A structurally inconsistent accumulator (even a
    signed one) is likewise rejected rather than probed.
    """
    if not verify_report(profile, public_key, report):
        raise RegistryError(
            f"report signature invalid for {report.location_id!r} "
            f"epoch {report.epoch_id}")
    if not bloom_well_formed(report.accumulator):
        raise RegistryError(
            f"malformed accumulator in report for {report.location_id!r} "
            f"epoch {report.epoch_id}")
    return bloom_contains(profile, report.accumulator,
                          proof_digest(profile, lp))


class EpochRegistry:
    """Append-only store of published epoch reports, keyed by location."""

    def __init__(self):
        self._reports: dict[str, dict[int, EpochReport]] = {}

    def publish(self, report: EpochReport) -> None:
        per_location = self._reports.setdefault(report.location_id, {})
        if report.epoch_id in per_location:
            raise RegistryError(
                f"report for {report.location_id!r} epoch {report.epoch_id} "
                "already published")
        per_location[report.epoch_id] = report

    def lookup(self, location_id: str, t: int) -> Optional[EpochReport]:
        """The unique report whose [start, end) interval contains t."""
        for report in self._reports.get(location_id, {}).values():
            if report.start <= t < report.end:
                return report
        return None

    def reports(self) -> list[EpochReport]:
        out = []
        for per_location in self._reports.values():
            out.extend(per_location.values())
        out.sort(key=lambda r: (r.location_id, r.epoch_id))
        return out

"""Bloom-filter accumulator ordering.

Each provenance entry carries a signed Bloom filter accumulating the
digests of every proof the user has collected so far. Because the filter
only ever gains bits, an earlier entry's filter is a bitwise subset of
every later one: order between any two revealed entries is decided by a
single AND, without touching the hidden entries in between. That makes
audit cost proportional to the number of *revealed* entries, at the price
of a per-entry filter sized for the whole chain.

Double-hashing index derivation (bit-exact, so independent
implementations interoperate):

    h1 = big-endian integer from bytes [0, 8) of digest(item || "A")
    h2 = big-endian integer from bytes [8, 16) of digest(item || "B")
    position_i = (h1 + i * h2) mod m        for i in 0..k-1

where ``digest`` is the active profile's hash and m is the filter's bit
size. The bit image serializes little-endian: bit j is bit (j % 8) of
byte (j // 8).
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Mapping

from .crypto import CryptoProfile, Digest, KeyPair
from .model import (
    BloomAccumulator,
    OrderingVerdict,
    RevealedSubsequence,
    SCHEME_BLOOM,
    ValidationError,
    bloom_bit_size,
    bloom_signing_bytes,
    proof_digest,
    ORDER_OK,
    ORDER_REORDERED,
    ORDER_INCOMPLETE,
)


class BloomParameterError(ValidationError):
    """Filters with different geometry cannot be compared."""


def bloom_hash_count(capacity: int, target_fpr: float) -> int:
    m = bloom_bit_size(capacity, target_fpr)
    return max(1, round(m / capacity * math.log(2)))


def bloom_new(capacity: int, target_fpr: float) -> BloomAccumulator:
    """Empty, unsigned accumulator sized for ``capacity`` insertions at the
    requested false-positive rate."""
    if capacity < 1:
        raise ValidationError("capacity must be at least 1")
    if not 0.0 < target_fpr < 1.0:
        raise ValidationError("target false-positive rate must be in (0, 1)")
    m = bloom_bit_size(capacity, target_fpr)
    return BloomAccumulator(
        bits=bytes((m + 7) // 8),
        hash_count=bloom_hash_count(capacity, target_fpr),
        capacity=capacity,
        target_fpr=target_fpr,
    )


def bloom_well_formed(acc: BloomAccumulator) -> bool:
    """Structural sanity of a possibly hostile accumulator: the bit image
    must match the length its declared parameters imply, so that indexing
    during membership checks cannot run off the end."""
    try:
        if not (acc.capacity >= 1 and 0.0 < acc.target_fpr < 1.0
                and acc.hash_count >= 1):
            return False
        return len(acc.bits) == (acc.bit_size + 7) // 8
    except (TypeError, ValueError, OverflowError):
        return False


def bloom_index(profile: CryptoProfile, item: Digest, i: int, m: int) -> int:
    """Bit position of hash function ``i`` for ``item`` (see module doc)."""
    h1 = int.from_bytes(profile.digest(item.data + b"A").data[0:8], "big")
    h2 = int.from_bytes(profile.digest(item.data + b"B").data[8:16], "big")
    return (h1 + i * h2) % m


def _positions(profile: CryptoProfile, item: Digest, acc: BloomAccumulator) -> list[int]:
    m = acc.bit_size
    h1 = int.from_bytes(profile.digest(item.data + b"A").data[0:8], "big")
    h2 = int.from_bytes(profile.digest(item.data + b"B").data[8:16], "big")
    return [(h1 + i * h2) % m for i in range(acc.hash_count)]


def bloom_insert(profile: CryptoProfile, acc: BloomAccumulator,
                 item: Digest) -> BloomAccumulator:
    """Set the item's bit positions, returning a new unsigned accumulator.

    Inserting past capacity is allowed (the false-positive rate degrades);
    the inserted count records it. The previous signature is dropped: the
    issuing authority signs the new image before release.
    """
    bits = bytearray(acc.bits)
    for pos in _positions(profile, item, acc):
        bits[pos // 8] |= 1 << (pos % 8)
    return replace(acc, bits=bytes(bits), inserted_count=acc.inserted_count + 1,
                   authority_sig=None)


def bloom_contains(profile: CryptoProfile, acc: BloomAccumulator,
                   item: Digest) -> bool:
    """Membership check: false positives at the configured rate, never
    false negatives."""
    return all(
        acc.bits[pos // 8] & (1 << (pos % 8))
        for pos in _positions(profile, item, acc)
    )


def bloom_subset(a: BloomAccumulator, b: BloomAccumulator) -> bool:
    """True iff every bit of ``a`` is also set in ``b``."""
    if (a.bit_size, a.hash_count) != (b.bit_size, b.hash_count):
        raise BloomParameterError(
            f"filter geometry mismatch: ({a.bit_size}, {a.hash_count}) vs "
            f"({b.bit_size}, {b.hash_count})")
    a_int = int.from_bytes(a.bits, "little")
    b_int = int.from_bytes(b.bits, "little")
    return a_int & b_int == a_int


def popcount(acc: BloomAccumulator) -> int:
    return int.from_bytes(acc.bits, "little").bit_count()


def sign_accumulator(profile: CryptoProfile, authority_keys: KeyPair,
                     acc: BloomAccumulator) -> BloomAccumulator:
    sig = profile.sign(authority_keys.private_key, bloom_signing_bytes(acc))
    return replace(acc, authority_sig=sig)


def verify_accumulator(profile: CryptoProfile, public_key: bytes,
                       acc: BloomAccumulator) -> bool:
    if acc.authority_sig is None:
        return False
    return profile.verify(public_key, bloom_signing_bytes(acc), acc.authority_sig)


def bloom_order_verify(
    profile: CryptoProfile,
    sub: RevealedSubsequence,
    authority_pubkeys: Mapping[str, bytes],
) -> OrderingVerdict:
    """Check claimed order using only the revealed entries' accumulators.

    Each revealed entry must carry a validly signed accumulator containing
    its own proof digest, and each accumulator must be a strict subset of
    the next one presented. Equal accumulators never arise from honest
    insertion and are rejected as ordering evidence.
    """
    if sub.scheme != SCHEME_BLOOM:
        raise ValidationError(f"subsequence scheme is {sub.scheme!r}, not bloom")

    checked = 0
    signatures = 0
    previous = None
    for revealed in sub.entries:
        acc = revealed.entry.ordering
        if not isinstance(acc, BloomAccumulator):
            return OrderingVerdict(
                status=ORDER_INCOMPLETE, accumulators_checked=checked,
                signatures_verified=signatures,
                detail=f"entry at position {revealed.position} has no accumulator")
        if not bloom_well_formed(acc):
            return OrderingVerdict(
                status=ORDER_INCOMPLETE, accumulators_checked=checked,
                signatures_verified=signatures,
                detail=f"malformed accumulator at position {revealed.position}")
        issuer = revealed.entry.elp.proof.statement.location_id
        public_key = authority_pubkeys.get(issuer)
        if public_key is None or acc.authority_sig is None:
            return OrderingVerdict(
                status=ORDER_INCOMPLETE, accumulators_checked=checked,
                signatures_verified=signatures,
                detail=f"unverifiable accumulator at position {revealed.position}")
        checked += 1
        signatures += 1
        if not verify_accumulator(profile, public_key, acc):
            return OrderingVerdict(
                status=ORDER_REORDERED, accumulators_checked=checked,
                signatures_verified=signatures,
                detail=f"accumulator signature invalid at position {revealed.position}")
        own = proof_digest(profile, revealed.entry.elp.proof)
        if not bloom_contains(profile, acc, own):
            return OrderingVerdict(
                status=ORDER_REORDERED, accumulators_checked=checked,
                signatures_verified=signatures,
                detail=f"own proof not in accumulator at position {revealed.position}")
        if previous is not None:
            prev_pos, prev_acc = previous
            try:
                is_subset = bloom_subset(prev_acc, acc)
            except BloomParameterError:
                return OrderingVerdict(
                    status=ORDER_REORDERED, accumulators_checked=checked,
                    signatures_verified=signatures,
                    detail=(f"accumulator geometry changed between positions "
                            f"{prev_pos} and {revealed.position}"))
            if prev_acc.bits == acc.bits:
                return OrderingVerdict(
                    status=ORDER_REORDERED, accumulators_checked=checked,
                    signatures_verified=signatures,
                    detail=(f"equal accumulators at positions {prev_pos} and "
                            f"{revealed.position}"))
            if not is_subset:
                return OrderingVerdict(
                    status=ORDER_REORDERED, accumulators_checked=checked,
                    signatures_verified=signatures,
                    detail=(f"accumulator at position {prev_pos} is not a subset "
                            f"of position {revealed.position}"))
        previous = (revealed.position, acc)

    return OrderingVerdict(status=ORDER_OK, accumulators_checked=checked,
                           signatures_verified=signatures)

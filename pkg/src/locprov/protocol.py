"""Provenance-entry creation protocol: User, LocationAuthority, Witness.

One visit is a request-response cascade. The user discovers the location
authority and sends a proof request (``pReq``) carrying her identity and
the ordering construct from the last entry of her chain (or a genesis
marker). The authority runs secure localization (abstracted behind a
pluggable oracle) to confirm she is actually present, then builds and
signs the location proof, derives the new ordering construct from the
supplied one, records the proof digest in its pending epoch list, and
replies (``pResp``). The user forwards the proof to a nearby witness
(``eReq``); the witness runs its own localization check against the user,
asks the proof's authority to timestamp the endorsement (``tReq`` /
``tResp``, refused when the request arrives long after issuance), accepts
the timestamp only if it follows the visit time closely and agrees with
its own clock, signs the endorsement statement, and replies (``eResp``).
The user assembles the endorsed proof into a new chain entry.

All parties run as single-threaded state machines over a FIFO message
queue; a scenario is a deterministic event loop given its seed. Dishonest
behavior is expressed through per-role override hooks (skip localization,
shift timestamps, defer epoch records, ...) so attacks compose instead of
being hard-coded.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field as dataclass_field, replace as dataclass_replace
from typing import Callable, Optional

from . import hashchain
from .bloom import bloom_insert, bloom_new, sign_accumulator
from .crypto import CryptoProfile, Digest, KeyPair, derive_seed
from .epochs import EpochRegistry, build_epoch_report, epoch_of
from .model import (
    BloomAccumulator,
    Endorsement,
    HashChainLink,
    LocationProof,
    OrderingConstruct,
    ProvenanceChain,
    ProvenanceEntry,
    TimestampAttestation,
    ValidationError,
    SCHEME_BLOOM,
    SCHEME_HASHCHAIN,
    assemble_elp,
    canonical_encode,
    make_endorsement,
    make_private_statement,
    make_proof,
    make_statement,
    ordering_scheme,
    proof_digest,
    statement_signing_bytes,
)

# Message kinds
PREQ = "pReq"
PRESP = "pResp"
EREQ = "eReq"
TREQ = "tReq"
TRESP = "tResp"
ERESP = "eResp"
PROXY_REQ = "proxyReq"
PROXY_RESP = "proxyResp"
REFUSAL = "refusal"

# Refusal reasons
REFUSE_NOT_PRESENT = "localization-failed"
REFUSE_NOT_COLOCATED = "co-location-failed"
REFUSE_STALE_PROOF = "timestamp-request-too-late"
REFUSE_BAD_WINDOW = "endorsement-window-violated"
REFUSE_CLOCK_DISAGREEMENT = "timestamp-implausible"
REFUSE_UNKNOWN_PROOF = "unknown-proof"
REFUSE_BAD_PROOF = "proof-verification-failed"
REFUSE_BAD_SCHEME = "ordering-scheme-mismatch"


class ProtocolError(ValidationError):
    pass


class UnknownPartyError(ProtocolError):
    pass


class TrustError(ProtocolError):
    pass


@dataclass
class ProtocolConfig:
    endorsement_window_ms: int = 60_000
    timestamp_lag_ms: int = 30_000
    epoch_len_ms: int = 300_000
    witness_clock_tolerance_ms: int = 60_000
    epoch_capacity: int = 4096
    epoch_fpr: float = 0.001
    chain_capacity: int = 1000
    chain_fpr: float = 0.001
    # simulated transmission delay applied before each message delivery
    hop_delay_ms: int = 200


@dataclass(frozen=True)
class Message:
    kind: str
    sender: str
    receiver: str
    payload: dict


class SimClock:
    """Global discrete simulation clock (milliseconds)."""

    def __init__(self, now: int = 0):
        self.now = now

    def advance(self, ms: int) -> None:
        if ms < 0:
            raise ValidationError("clock cannot run backwards")
        self.now += ms


@dataclass(frozen=True)
class LocalizationOracle:
    """Stand-in for physical secure localization (distance bounding and
    friends): answers whether a prover is at a location at a sim time."""

    policy: Callable[[str, str, int], bool]

    def present(self, prover_id: str, location_id: str, now: int) -> bool:
        return bool(self.policy(prover_id, location_id, now))


class GroundTruth:
    """Actual positions of parties; the honest oracle consults this."""

    def __init__(self):
        self._positions: dict[str, set[str]] = {}

    def place(self, party_id: str, location_id: str) -> None:
        self._positions[party_id] = {location_id}

    def also_place(self, party_id: str, location_id: str) -> None:
        # A cloned device makes the same identity show up in two places.
        self._positions.setdefault(party_id, set()).add(location_id)

    def locations_of(self, party_id: str) -> set[str]:
        return self._positions.get(party_id, set())

    def oracle(self) -> LocalizationOracle:
        return LocalizationOracle(
            lambda prover, loc, now: loc in self.locations_of(prover))


@dataclass
class Directory:
    """Public lookup of party identities, keys and authority metadata."""

    parties: dict[str, dict] = dataclass_field(default_factory=dict)

    def register(self, party_id: str, role: str, public_key: bytes,
                 scheme_id: str) -> None:
        self.parties[party_id] = {
            "role": role, "public_key": public_key, "scheme_id": scheme_id}

    def public_key(self, party_id: str) -> bytes:
        try:
            return self.parties[party_id]["public_key"]
        except KeyError:
            raise UnknownPartyError(f"no directory entry for {party_id!r}") from None

    def has(self, party_id: str) -> bool:
        return party_id in self.parties

    def pubkeys(self) -> dict[str, bytes]:
        return {pid: meta["public_key"] for pid, meta in self.parties.items()}


class MessageBus:
    """FIFO queue plus an append-only trace of every delivered message."""

    def __init__(self, clock: SimClock, config: ProtocolConfig):
        self.clock = clock
        self.config = config
        self.queue: deque[Message] = deque()
        self.handlers: dict[str, Callable[[Message], None]] = {}
        self.trace: list[dict] = []

    def register(self, party_id: str, handler: Callable[[Message], None]) -> None:
        self.handlers[party_id] = handler

    def send(self, msg: Message) -> None:
        self.queue.append(msg)

    def run(self) -> None:
        while self.queue:
            msg = self.queue.popleft()
            self.clock.advance(self.config.hop_delay_ms)
            self.trace.append(self._trace_entry(msg))
            handler = self.handlers.get(msg.receiver)
            if handler is None:
                raise UnknownPartyError(f"no handler for {msg.receiver!r}")
            handler(msg)

    def _trace_entry(self, msg: Message) -> dict:
        return {
            "seq": len(self.trace),
            "clock": self.clock.now,
            "kind": msg.kind,
            "sender": msg.sender,
            "receiver": msg.receiver,
            "payload": _payload_fingerprint(msg.payload),
        }


def _payload_fingerprint(payload: dict) -> dict:
    """Compact, deterministic rendering of a payload for trace logs."""
    out = {}
    for key in sorted(payload):
        value = payload[key]
        if value is None or isinstance(value, (bool, int, str)):
            out[key] = value
        elif isinstance(value, bytes):
            out[key] = value.hex()
        elif isinstance(value, Digest):
            out[key] = value.data.hex()
        else:
            try:
                out[key] = canonical_encode(value).hex()[:48]
            except Exception:
                out[key] = repr(value)
    return out


def trace_to_jsonl(trace: list[dict]) -> str:
    return "\n".join(json.dumps(entry, sort_keys=True) for entry in trace) + "\n"


# ---------------------------------------------------------------------------
# Behavior overrides (dishonest-role hooks)
# ---------------------------------------------------------------------------

@dataclass
class AuthorityBehavior:
    skip_localization: bool = False
    # added to the authority-local clock when stamping visit times
    visit_time_shift_ms: int = 0
    # added to the authority-local clock when signing endorsement timestamps
    timestamp_shift_ms: int = 0
    approve_stale_timestamps: bool = False
    suppress_epoch_record: bool = False
    # record the digest in the epoch containing the (shifted) visit time
    # instead of the epoch it was actually issued in (post-dating)
    defer_record_to_visit_epoch: bool = False


@dataclass
class WitnessBehavior:
    skip_localization: bool = False
    ignore_time_checks: bool = False


# ---------------------------------------------------------------------------
# Agents
# ---------------------------------------------------------------------------

class AuthorityAgent:
    """Location authority: issues proofs, ordering constructs, endorsement
    timestamps, and per-epoch reports."""

    def __init__(self, authority_id: str, keys: KeyPair, profile: CryptoProfile,
                 config: ProtocolConfig, clock: SimClock,
                 oracle: LocalizationOracle, registry: EpochRegistry,
                 scheme: str, rng: random.Random, bus: "MessageBus",
                 directory: Directory,
                 granularities: Optional[list[str]] = None,
                 skew_ms: int = 0,
                 behavior: Optional[AuthorityBehavior] = None,
                 trusted_proxies: Optional[set[str]] = None,
                 proxy_parent: Optional[str] = None):
        self.id = authority_id
        self.keys = keys
        self.profile = profile
        self.config = config
        self.clock = clock
        self.oracle = oracle
        self.registry = registry
        self.scheme = scheme
        self.rng = rng
        self.bus = bus
        self.directory = directory
        self.granularities = granularities
        self.skew_ms = skew_ms
        self.behavior = behavior or AuthorityBehavior()
        self.trusted_proxies = trusted_proxies or set()
        self.proxy_parent = proxy_parent

        self.pending_digests: list[Digest] = []
        self.deferred_digests: dict[int, list[Digest]] = {}
        self.issue_log: dict[bytes, int] = {}
        self.current_epoch = 0
        self.last_timestamp = 0
        self._pending_proxy: dict[bytes, Message] = {}

    # -- time ----------------------------------------------------------------

    def local_now(self) -> int:
        return self.clock.now + self.skew_ms

    def roll_epochs(self) -> None:
        """Publish reports for every fully elapsed epoch."""
        while self.local_now() >= (self.current_epoch + 1) * self.config.epoch_len_ms:
            self._close_current_epoch()

    def _close_current_epoch(self) -> None:
        digests = list(self.pending_digests)
        digests.extend(self.deferred_digests.pop(self.current_epoch, []))
        report = build_epoch_report(
            self.profile, self.keys, self.id, self.current_epoch,
            self.config.epoch_len_ms, digests,
            capacity=self.config.epoch_capacity,
            target_fpr=self.config.epoch_fpr,
        )
        self.registry.publish(report)
        self.pending_digests.clear()
        self.current_epoch += 1

    # -- message handling ----------------------------------------------------

    def handle(self, msg: Message) -> None:
        self.roll_epochs()
        if msg.kind == PREQ:
            self._handle_preq(msg)
        elif msg.kind == TREQ:
            self._handle_treq(msg)
        elif msg.kind == PROXY_REQ:
            self._handle_proxy_req(msg)
        elif msg.kind == PROXY_RESP:
            self._handle_proxy_resp(msg)
        elif msg.kind == REFUSAL:
            self._handle_parent_refusal(msg)
        else:
            raise ProtocolError(f"authority cannot handle {msg.kind!r}")

    def _refuse(self, msg: Message, reason: str, re_kind: str) -> None:
        self.bus.send(Message(REFUSAL, self.id, msg.sender,
                              {"reason": reason, "re": re_kind}))

    def _handle_preq(self, msg: Message) -> None:
        user_id = msg.payload["user_id"]
        prev = msg.payload.get("prev_construct")
        if not self.behavior.skip_localization and not self.oracle.present(
                user_id, self.id, self.clock.now):
            self._refuse(msg, REFUSE_NOT_PRESENT, PREQ)
            return
        visit_time = self.local_now() + self.behavior.visit_time_shift_ms
        lp = self._build_proof(user_id, visit_time)
        if self.proxy_parent is not None:
            # Hand the proof to the broader-area authority for re-signing;
            # reply to the user once it comes back.
            digest = proof_digest(self.profile, lp)
            self._pending_proxy[digest.data] = msg
            self.bus.send(Message(PROXY_REQ, self.id, self.proxy_parent, {
                "proof": lp, "prev_construct": prev, "requester": user_id}))
            return
        construct = self._issue_construct(lp, prev)
        self._record_issue(lp, visit_time)
        self.bus.send(Message(PRESP, self.id, msg.sender, {
            "proof": lp, "construct": construct}))

    def _build_proof(self, user_id: str, visit_time: int) -> LocationProof:
        if self.granularities:
            stmt = make_private_statement(
                self.profile, user_id, self.id, visit_time,
                self.granularities, self.rng)
        else:
            stmt = make_statement(user_id, self.id, visit_time)
        return make_proof(self.profile, self.keys, stmt)

    def _issue_construct(self, lp: LocationProof,
                         prev: Optional[OrderingConstruct]) -> OrderingConstruct:
        if self.scheme == SCHEME_HASHCHAIN:
            if prev is None:
                return hashchain.chain_genesis(self.profile, self.keys, lp)
            if not isinstance(prev, HashChainLink):
                raise ProtocolError("previous construct is not a hash-chain link")
            return hashchain.chain_extend(self.profile, self.keys, lp, prev)
        if self.scheme == SCHEME_BLOOM:
            if prev is None:
                acc = bloom_new(self.config.chain_capacity, self.config.chain_fpr)
            elif isinstance(prev, BloomAccumulator):
                acc = prev
            else:
                raise ProtocolError("previous construct is not an accumulator")
            acc = bloom_insert(self.profile, acc, proof_digest(self.profile, lp))
            return sign_accumulator(self.profile, self.keys, acc)
        raise ProtocolError(f"unknown ordering scheme {self.scheme!r}")

    def _record_issue(self, lp: LocationProof, visit_time: int) -> None:
        digest = proof_digest(self.profile, lp)
        self.issue_log[digest.data] = self.local_now()
        if self.behavior.suppress_epoch_record:
            return
        if self.behavior.defer_record_to_visit_epoch:
            target = epoch_of(visit_time, self.config.epoch_len_ms)
            if target != self.current_epoch:
                self.deferred_digests.setdefault(target, []).append(digest)
                return
        self.pending_digests.append(digest)

    def _handle_treq(self, msg: Message) -> None:
        digest: Digest = msg.payload["proof_digest"]
        issued_at = self.issue_log.get(digest.data)
        if issued_at is None and not self.behavior.approve_stale_timestamps:
            self._refuse(msg, REFUSE_UNKNOWN_PROOF, TREQ)
            return
        now = self.local_now()
        if (not self.behavior.approve_stale_timestamps
                and now - issued_at > self.config.timestamp_lag_ms):
            self._refuse(msg, REFUSE_STALE_PROOF, TREQ)
            return
        endorsed_at = max(now + self.behavior.timestamp_shift_ms,
                          self.last_timestamp)
        self.last_timestamp = endorsed_at
        attestation = TimestampAttestation(digest, endorsed_at)
        sig = self.profile.sign(self.keys.private_key,
                                canonical_encode(attestation))
        self.bus.send(Message(TRESP, self.id, msg.sender, {
            "proof_digest": digest, "endorsed_at": endorsed_at,
            "time_sig": sig}))

    # -- proxy re-signing ----------------------------------------------------

    def _handle_proxy_req(self, msg: Message) -> None:
        lp: LocationProof = msg.payload["proof"]
        try:
            new_lp = proxy_resign(self.profile, self, msg.sender, lp)
        except (TrustError, ProtocolError) as exc:
            self.bus.send(Message(REFUSAL, self.id, msg.sender, {
                "reason": str(exc), "re": PROXY_REQ}))
            return
        construct = self._issue_construct(new_lp, msg.payload.get("prev_construct"))
        self._record_issue(new_lp, new_lp.statement.visit_time)
        self.bus.send(Message(PROXY_RESP, self.id, msg.sender, {
            "proof": new_lp, "construct": construct,
            "requester": msg.payload["requester"]}))

    def _handle_proxy_resp(self, msg: Message) -> None:
        lp: LocationProof = msg.payload["proof"]
        # match the original user request by requester id
        original = None
        for key, pending in list(self._pending_proxy.items()):
            if pending.payload["user_id"] == msg.payload["requester"]:
                original = self._pending_proxy.pop(key)
                break
        if original is None:
            raise ProtocolError("proxy response without a pending request")
        self.bus.send(Message(PRESP, self.id, original.sender, {
            "proof": lp, "construct": msg.payload["construct"]}))

    def _handle_parent_refusal(self, msg: Message) -> None:
        # The broader-area authority declined to re-sign; pass the refusal
        # on to whoever is still waiting for a proof.
        for key, pending in list(self._pending_proxy.items()):
            del self._pending_proxy[key]
            self._refuse(pending, msg.payload["reason"], PREQ)


def proxy_resign(profile: CryptoProfile, broad_authority: AuthorityAgent,
                 requesting_authority_id: str, lp: LocationProof) -> LocationProof:
    """Re-sign a proof under a broader-area authority, replacing the issuing
    authority's identity so auditors cannot infer the precise spot.

    The pair must appear in the broad authority's trust table, and the
    original proof must verify under the requesting authority's key.
    """
    if requesting_authority_id not in broad_authority.trusted_proxies:
        raise TrustError(
            f"{broad_authority.id!r} does not proxy for "
            f"{requesting_authority_id!r}")
    original_key = broad_authority.directory.public_key(requesting_authority_id)
    if not profile.verify(original_key, statement_signing_bytes(lp.statement),
                          lp.authority_sig):
        raise ProtocolError(REFUSE_BAD_PROOF)
    new_statement = dataclass_replace(lp.statement, location_id=broad_authority.id)
    return make_proof(profile, broad_authority.keys, new_statement)


class WitnessAgent:
    """Co-located third party that endorses location proofs."""

    def __init__(self, witness_id: str, keys: KeyPair, profile: CryptoProfile,
                 config: ProtocolConfig, clock: SimClock,
                 oracle: LocalizationOracle, ground_truth: GroundTruth,
                 bus: "MessageBus", skew_ms: int = 0,
                 behavior: Optional[WitnessBehavior] = None):
        self.id = witness_id
        self.keys = keys
        self.profile = profile
        self.config = config
        self.clock = clock
        self.oracle = oracle
        self.ground_truth = ground_truth
        self.bus = bus
        self.skew_ms = skew_ms
        self.behavior = behavior or WitnessBehavior()
        self._pending: dict[bytes, Message] = {}

    def local_now(self) -> int:
        return self.clock.now + self.skew_ms

    def current_location(self) -> Optional[str]:
        locations = self.ground_truth.locations_of(self.id)
        return next(iter(sorted(locations)), None)

    def handle(self, msg: Message) -> None:
        if msg.kind == EREQ:
            self._handle_ereq(msg)
        elif msg.kind == TRESP:
            self._handle_tresp(msg)
        elif msg.kind == REFUSAL:
            self._handle_authority_refusal(msg)
        else:
            raise ProtocolError(f"witness cannot handle {msg.kind!r}")

    def _refuse(self, requester: str, reason: str) -> None:
        self.bus.send(Message(REFUSAL, self.id, requester,
                              {"reason": reason, "re": EREQ}))

    def _handle_ereq(self, msg: Message) -> None:
        lp: LocationProof = msg.payload["proof"]
        user_id = lp.statement.user_id
        here = self.current_location()
        if not self.behavior.skip_localization:
            if here is None or not self.oracle.present(user_id, here, self.clock.now):
                self._refuse(msg.sender, REFUSE_NOT_COLOCATED)
                return
        digest = proof_digest(self.profile, lp)
        self._pending[digest.data] = msg
        self.bus.send(Message(TREQ, self.id, lp.statement.location_id,
                              {"proof_digest": digest}))

    def _handle_tresp(self, msg: Message) -> None:
        digest: Digest = msg.payload["proof_digest"]
        pending = self._pending.pop(digest.data, None)
        if pending is None:
            raise ProtocolError("timestamp for a proof the witness never saw")
        lp: LocationProof = pending.payload["proof"]
        endorsed_at: int = msg.payload["endorsed_at"]
        t = lp.statement.visit_time
        if not self.behavior.ignore_time_checks:
            if not t <= endorsed_at <= t + self.config.endorsement_window_ms:
                self._refuse(pending.sender, REFUSE_BAD_WINDOW)
                return
            if abs(endorsed_at - self.local_now()) > self.config.witness_clock_tolerance_ms:
                self._refuse(pending.sender, REFUSE_CLOCK_DISAGREEMENT)
                return
        endorsement = make_endorsement(
            self.profile, self.keys, self.id, lp, endorsed_at,
            msg.payload["time_sig"],
            # a colluding witness signs whatever window it is handed
            window_ms=(1 << 62) if self.behavior.ignore_time_checks
            else self.config.endorsement_window_ms,
        )
        self.bus.send(Message(ERESP, self.id, pending.sender,
                              {"endorsement": endorsement, "proof": lp}))

    def _handle_authority_refusal(self, msg: Message) -> None:
        # The authority declined to timestamp; give up on every pending
        # endorsement tied to it (there is at most one in practice).
        for digest, pending in list(self._pending.items()):
            lp: LocationProof = pending.payload["proof"]
            if lp.statement.location_id == msg.sender:
                del self._pending[digest]
                self._refuse(pending.sender, msg.payload["reason"])


@dataclass
class VisitOutcome:
    ok: bool
    reason: str = ""
    entry: Optional[ProvenanceEntry] = None


class UserAgent:
    """Mobile user collecting endorsed proofs into a provenance chain."""

    def __init__(self, user_id: str, keys: KeyPair, profile: CryptoProfile,
                 config: ProtocolConfig, scheme: str, directory: Directory,
                 bus: "MessageBus"):
        self.id = user_id
        self.keys = keys
        self.profile = profile
        self.config = config
        self.directory = directory
        self.bus = bus
        self.chain = ProvenanceChain(scheme)
        self.visit_log: list[VisitOutcome] = []
        self._pending_construct: Optional[OrderingConstruct] = None
        self._pending_witness: Optional[str] = None
        self._replay_construct: Optional[OrderingConstruct] = None

    @property
    def latest_construct(self) -> Optional[OrderingConstruct]:
        return self.chain.latest_construct

    def replay_construct_from(self, position: int) -> None:
        """Arrange for the next proof request to present the ordering
        construct from an older chain position (chain-forking replay)."""
        self._replay_construct = self.chain.entries[position - 1].ordering

    def start_visit(self, location_id: str, witness_id: str) -> None:
        if not self.directory.has(location_id):
            raise UnknownPartyError(f"authority {location_id!r} not in directory")
        prev = self._replay_construct if self._replay_construct is not None \
            else self.latest_construct
        self._replay_construct = None
        self._pending_witness = witness_id
        self.bus.send(Message(PREQ, self.id, location_id, {
            "user_id": self.id, "prev_construct": prev}))

    def handle(self, msg: Message) -> None:
        if msg.kind == PRESP:
            self._handle_presp(msg)
        elif msg.kind == ERESP:
            self._handle_eresp(msg)
        elif msg.kind == REFUSAL:
            self.visit_log.append(VisitOutcome(False, msg.payload["reason"]))
            self._pending_construct = None
            self._pending_witness = None
        else:
            raise ProtocolError(f"user cannot handle {msg.kind!r}")

    def _handle_presp(self, msg: Message) -> None:
        lp: LocationProof = msg.payload["proof"]
        issuer_key = self.directory.public_key(lp.statement.location_id)
        if not self.profile.verify(issuer_key,
                                   statement_signing_bytes(lp.statement),
                                   lp.authority_sig):
            self.visit_log.append(VisitOutcome(False, REFUSE_BAD_PROOF))
            return
        self._pending_construct = msg.payload["construct"]
        self.bus.send(Message(EREQ, self.id, self._pending_witness,
                              {"proof": lp}))

    def _handle_eresp(self, msg: Message) -> None:
        endorsement: Endorsement = msg.payload["endorsement"]
        lp: LocationProof = msg.payload["proof"]
        elp = assemble_elp(self.profile, lp, [endorsement])
        entry = ProvenanceEntry(elp, self._pending_construct)
        self.append_entry(entry)
        self._pending_construct = None
        self._pending_witness = None
        self.visit_log.append(VisitOutcome(True, entry=entry))

    def append_entry(self, entry: ProvenanceEntry) -> ProvenanceChain:
        if ordering_scheme(entry.ordering) != self.chain.scheme:
            raise ProtocolError(REFUSE_BAD_SCHEME)
        self.chain = self.chain.append(entry)
        return self.chain


# ---------------------------------------------------------------------------
# World assembly
# ---------------------------------------------------------------------------

class World:
    """Everything one simulation run needs, wired together."""

    def __init__(self, profile: CryptoProfile, scheme: str,
                 config: Optional[ProtocolConfig] = None, seed: int = 0):
        self.profile = profile
        self.scheme = scheme
        self.config = config or ProtocolConfig()
        self.master_seed = seed.to_bytes(8, "big") + bytes(24)
        self.rng = random.Random(seed)
        self.clock = SimClock()
        self.ground_truth = GroundTruth()
        self.oracle = self.ground_truth.oracle()
        self.directory = Directory()
        self.registry = EpochRegistry()
        self.bus = MessageBus(self.clock, self.config)
        self.users: dict[str, UserAgent] = {}
        self.authorities: dict[str, AuthorityAgent] = {}
        self.witnesses: dict[str, WitnessAgent] = {}

    def _keys_for(self, label: str) -> KeyPair:
        return self.profile.keygen(derive_seed(self.master_seed, label))

    def add_user(self, user_id: str) -> UserAgent:
        keys = self._keys_for("user:" + user_id)
        agent = UserAgent(user_id, keys, self.profile, self.config,
                          self.scheme, self.directory, self.bus)
        self.users[user_id] = agent
        self.directory.register(user_id, "user", keys.public_key,
                                keys.scheme_id)
        self.bus.register(user_id, agent.handle)
        return agent

    def add_authority(self, authority_id: str, *,
                      granularities: Optional[list[str]] = None,
                      skew_ms: int = 0,
                      behavior: Optional[AuthorityBehavior] = None,
                      trusted_proxies: Optional[set[str]] = None,
                      proxy_parent: Optional[str] = None) -> AuthorityAgent:
        keys = self._keys_for("authority:" + authority_id)
        agent = AuthorityAgent(
            authority_id, keys, self.profile, self.config, self.clock,
            self.oracle, self.registry, self.scheme, self.rng, self.bus,
            self.directory,
            granularities=granularities, skew_ms=skew_ms, behavior=behavior,
            trusted_proxies=trusted_proxies, proxy_parent=proxy_parent)
        self.authorities[authority_id] = agent
        self.directory.register(authority_id, "authority", keys.public_key,
                                keys.scheme_id)
        self.bus.register(authority_id, agent.handle)
        return agent

    def add_witness(self, witness_id: str, *, skew_ms: int = 0,
                    behavior: Optional[WitnessBehavior] = None) -> WitnessAgent:
        keys = self._keys_for("witness:" + witness_id)
        agent = WitnessAgent(witness_id, keys, self.profile, self.config,
                             self.clock, self.oracle, self.ground_truth,
                             self.bus, skew_ms=skew_ms, behavior=behavior)
        self.witnesses[witness_id] = agent
        self.directory.register(witness_id, "witness", keys.public_key,
                                keys.scheme_id)
        self.bus.register(witness_id, agent.handle)
        return agent

    def place(self, party_id: str, location_id: str) -> None:
        self.ground_truth.place(party_id, location_id)

    def advance(self, ms: int) -> None:
        """Advance simulated time, letting authorities publish any epoch
        reports whose boundaries pass. Prompt publication is what gives the
        reports their anti-backdating power: once an epoch's report is out,
        no later forgery can get into it."""
        self.clock.advance(ms)
        for authority in self.authorities.values():
            authority.roll_epochs()

    def run_visit(self, user_id: str, location_id: str,
                  witness_id: str) -> VisitOutcome:
        """Drive one full visit through the message loop."""
        user = self.users[user_id]
        visits_before = len(user.visit_log)
        user.start_visit(location_id, witness_id)
        self.bus.run()
        if len(user.visit_log) == visits_before:
            return VisitOutcome(False, "visit never completed")
        return user.visit_log[-1]

    def finalize_epochs(self) -> None:
        """Advance time past the current epoch boundary everywhere and
        publish all outstanding reports, so freshly issued proofs become
        auditable against the registry."""
        horizon = max(
            (a.current_epoch + 1) * self.config.epoch_len_ms - a.skew_ms
            for a in self.authorities.values()
        )
        # Jump far enough that every authority, and any deferred epoch
        # record, has passed its boundary.
        deferred_horizon = max(
            ((target + 1) * self.config.epoch_len_ms - a.skew_ms
             for a in self.authorities.values()
             for target in a.deferred_digests),
            default=0,
        )
        target_time = max(horizon, deferred_horizon, self.clock.now)
        if target_time > self.clock.now:
            self.clock.advance(target_time - self.clock.now)
        for authority in self.authorities.values():
            authority.roll_epochs()

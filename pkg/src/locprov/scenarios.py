"""Deterministic attack-scenario engine for the collusion threat matrix.

A scenario is declarative data: actors with honesty flags and behavior
overrides, a script of timed visits and attack actions, and a presentation
(which chain positions get revealed, in what claimed order, with which
granularity openings). Running one replays the protocol event loop with
the scripted misbehavior, audits whatever the presenting side ends up
holding, and compares the outcome against the expectation.

An attack counts as defeated when either the audit flags the presented
history (``detected``) or an honest party's refusal prevented the artifact
from being created at all (``prevented``). Honesty notation in row labels:
uppercase honest, lowercase malicious (e.g. ``uLW`` is a malicious user
with honest location and witness).

The built-in suite instantiates every honesty combination of the threat
matrix plus the named attacks: false presence, reordering, proof
switching, denial of presence, doppelganger, chain forking, false time,
backdating, future dating, post-dating, false endorsement and implication.
Two attacks are expected to evade the audit and are documented as gaps
rather than asserted as detections: post-dating (the colluders premeditate
the epoch record itself) and the doppelganger (defeating cloned devices
needs hardware fingerprinting, which is out of scope here). Denial of
service (a party refusing to participate) is likewise out of scope: the
suite records refusal behavior where it arises but asserts no defense
against a party that simply stays silent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict, replace as dataclass_replace
from typing import Optional

from .audit import AuditReport, LocationClaim, audit, classify_failure
from .crypto import CryptoProfile, derive_seed, get_profile
from .hashchain import chain_genesis, chain_extend
from .bloom import bloom_insert, bloom_new, sign_accumulator
from .model import (
    EndorsedLocationProof,
    ProvenanceChain,
    ProvenanceEntry,
    TimestampAttestation,
    ValidationError,
    SCHEME_BLOOM,
    SCHEME_HASHCHAIN,
    assemble_elp,
    canonical_encode,
    make_endorsement,
    make_proof,
    make_statement,
    make_revealed_subsequence,
    proof_digest,
)
from .protocol import (
    AuthorityBehavior,
    ProtocolConfig,
    WitnessBehavior,
    World,
    trace_to_jsonl,
)


class ScriptError(ValidationError):
    """The scenario script asked for something impossible."""


@dataclass
class ActorSpec:
    actor_id: str
    role: str  # "user" | "authority" | "witness"
    honest: bool = True
    behavior: dict = field(default_factory=dict)
    granularities: Optional[list[str]] = None
    skew_ms: int = 0
    location: Optional[str] = None  # initial placement
    trusted_proxies: Optional[list[str]] = None
    proxy_parent: Optional[str] = None


@dataclass
class Scenario:
    name: str
    threat_row: str
    attack: str
    description: str
    seed: int
    scheme: str
    actors: list[ActorSpec]
    script: list[dict]
    expected_detection: bool
    profile_name: str = "modern"
    config: dict = field(default_factory=dict)
    reveal: dict = field(default_factory=dict)
    claims: object = "truthful"
    notes: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "Scenario":
        actors = [ActorSpec(**a) for a in obj["actors"]]
        kwargs = {k: v for k, v in obj.items() if k != "actors"}
        return cls(actors=actors, **kwargs)


@dataclass
class ScenarioOutcome:
    scenario: str
    scheme: str
    audit_report: AuditReport
    prevented: bool
    expected_detection: bool
    refusals: list[str]
    trace: list[dict]
    threat_label: str = ""
    # what was presented to the auditor, for export
    subsequence: object = None
    claims: list = field(default_factory=list)
    registry: object = None
    directory: dict = field(default_factory=dict)
    profile_name: str = "modern"

    @property
    def detected(self) -> bool:
        return self.prevented or not self.audit_report.ok

    @property
    def matched(self) -> bool:
        return self.detected == self.expected_detection

    def trace_jsonl(self) -> str:
        return trace_to_jsonl(self.trace)


class _Runner:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.config = ProtocolConfig(**scenario.config)
        self.profile: CryptoProfile = get_profile(scenario.profile_name)
        self.world = World(self.profile, scenario.scheme, self.config,
                           seed=scenario.seed)
        self.presented: list[ProvenanceEntry] = []
        self.prevented = False
        self.refusals: list[str] = []
        self.events: list[dict] = []
        self._forged_keys: dict[str, object] = {}
        self._build_actors()

    # -- setup ---------------------------------------------------------------

    def _build_actors(self) -> None:
        for actor in self.scenario.actors:
            if actor.role == "user":
                self.world.add_user(actor.actor_id)
            elif actor.role == "authority":
                behavior = AuthorityBehavior(**actor.behavior)
                self.world.add_authority(
                    actor.actor_id,
                    granularities=actor.granularities,
                    skew_ms=actor.skew_ms,
                    behavior=behavior,
                    trusted_proxies=set(actor.trusted_proxies or ()),
                    proxy_parent=actor.proxy_parent,
                )
            elif actor.role == "witness":
                behavior = WitnessBehavior(**actor.behavior)
                self.world.add_witness(actor.actor_id, skew_ms=actor.skew_ms,
                                       behavior=behavior)
            else:
                raise ScriptError(f"unknown role {actor.role!r}")
            if actor.location:
                self.world.place(actor.actor_id, actor.location)

    def _event(self, **fields) -> None:
        fields.setdefault("clock", self.world.clock.now)
        self.events.append(fields)

    def _forged_keypair(self, label: str):
        if label not in self._forged_keys:
            seed = derive_seed(self.world.master_seed, "forged:" + label)
            self._forged_keys[label] = self.profile.keygen(seed)
        return self._forged_keys[label]

    # -- script ops ----------------------------------------------------------

    def run(self) -> ScenarioOutcome:
        for op in self.scenario.script:
            handler = getattr(self, "_op_" + op["op"], None)
            if handler is None:
                raise ScriptError(f"unknown script op {op['op']!r}")
            handler(op)
        self.world.finalize_epochs()
        report, sub, claims = self._audit_presentation()
        outcome = ScenarioOutcome(
            scenario=self.scenario.name,
            scheme=self.scenario.scheme,
            audit_report=report,
            prevented=self.prevented,
            expected_detection=self.scenario.expected_detection,
            refusals=self.refusals,
            trace=self.world.bus.trace + self.events,
            subsequence=sub,
            claims=claims,
            registry=self.world.registry,
            directory=dict(self.world.directory.parties),
            profile_name=self.scenario.profile_name,
        )
        if not report.ok:
            outcome.threat_label = classify_failure(report)
        return outcome

    def _op_advance(self, op: dict) -> None:
        self.world.advance(op["ms"])

    def _op_move(self, op: dict) -> None:
        self.world.place(op["party"], op["location"])
        self._event(event="move", party=op["party"], location=op["location"])

    def _op_clone(self, op: dict) -> None:
        # A cloned device makes the identity physically present in a second
        # location; only radiometric hardware fingerprinting (out of scope)
        # could tell the devices apart.
        self.world.ground_truth.also_place(op["identity"], op["location"])
        self._event(event="clone", identity=op["identity"],
                    location=op["location"])

    def _op_set_behavior(self, op: dict) -> None:
        party = op["party"]
        agent = (self.world.authorities.get(party)
                 or self.world.witnesses.get(party))
        if agent is None:
            raise ScriptError(f"no authority or witness {party!r}")
        if not hasattr(agent.behavior, op["field"]):
            raise ScriptError(f"no behavior field {op['field']!r}")
        setattr(agent.behavior, op["field"], op["value"])
        self._event(event="set_behavior", party=party, field=op["field"],
                    value=op["value"])

    def _op_visit(self, op: dict) -> None:
        outcome = self.world.run_visit(op["user"], op["location"], op["witness"])
        if outcome.ok:
            self.presented.append(outcome.entry)
            self._event(event="visit", user=op["user"], location=op["location"],
                        witness=op["witness"], result="ok",
                        position=len(self.presented))
        else:
            self.refusals.append(outcome.reason)
            self._event(event="visit", user=op["user"], location=op["location"],
                        witness=op["witness"], result="refused",
                        reason=outcome.reason)
            if op.get("attack"):
                self.prevented = True
            else:
                raise ScriptError(
                    f"honest visit refused: {outcome.reason} "
                    f"({op['user']} at {op['location']})")

    def _op_replay_construct(self, op: dict) -> None:
        self.world.users[op["user"]].replay_construct_from(op["position"])
        self._event(event="replay_construct", user=op["user"],
                    position=op["position"])

    def _op_drop_presented(self, op: dict) -> None:
        # The presenter simply leaves entries out of the history she shows.
        for position in sorted(op["positions"], reverse=True):
            del self.presented[position - 1]
        self._event(event="drop_presented", positions=op["positions"])

    def _op_switch_proof(self, op: dict) -> None:
        """Rebind a genuine proof to another entry's endorsements."""
        i, j = op["proof_from"], op["endorsements_from"]
        victim = self.presented[i - 1]
        donor = self.presented[j - 1]
        switched = ProvenanceEntry(
            elp=EndorsedLocationProof(victim.elp.proof, donor.elp.endorsements),
            ordering=victim.ordering,
        )
        self.presented[i - 1] = switched
        self._event(event="switch_proof", proof_from=i, endorsements_from=j)

    def _op_fabricate_visit(self, op: dict) -> None:
        """Mint a chain entry outside the protocol.

        Signatures of parties the attacker does not control are forged with
        keys of the attacker's own making and will not verify against the
        directory; parties listed as colluding sign with their real keys.
        """
        user_id = op["user"]
        location_id = op["location"]
        witness_id = op["witness"]
        forge_authority = op.get("forge_authority", True)
        forge_witness = op.get("forge_witness", True)
        t = self.world.clock.now + op.get("visit_time_shift_ms", 0)

        if forge_authority:
            authority_keys = self._forged_keypair("authority:" + location_id)
        else:
            authority_keys = self.world.authorities[location_id].keys
        stmt = make_statement(user_id, location_id, t)
        lp = make_proof(self.profile, authority_keys, stmt)
        digest = proof_digest(self.profile, lp)

        if not forge_authority and op.get("record_epoch", False):
            # A colluding authority quietly adds the digest to its pending
            # epoch list so the epoch check will not give the forgery away.
            self.world.authorities[location_id].pending_digests.append(digest)
            self.world.authorities[location_id].issue_log[digest.data] = t

        endorsed_at = t + op.get("endorsement_delay_ms", 1_000)
        attestation = TimestampAttestation(digest, endorsed_at)
        time_sig = self.profile.sign(authority_keys.private_key,
                                     canonical_encode(attestation))
        if forge_witness:
            witness_keys = self._forged_keypair("witness:" + witness_id)
        else:
            witness_keys = self.world.witnesses[witness_id].keys
        endorsement = make_endorsement(
            self.profile, witness_keys, witness_id, lp, endorsed_at,
            time_sig, window_ms=(1 << 62))
        elp = assemble_elp(self.profile, lp, [endorsement])

        prev = self.presented[-1].ordering if self.presented else None
        construct = self._fabricate_construct(lp, prev, authority_keys)
        self.presented.append(ProvenanceEntry(elp, construct))
        self._event(event="fabricate_visit", user=user_id,
                    location=location_id, witness=witness_id, visit_time=t,
                    position=len(self.presented))

    def _fabricate_construct(self, lp, prev, authority_keys):
        if self.scenario.scheme == SCHEME_HASHCHAIN:
            if prev is None:
                return chain_genesis(self.profile, authority_keys, lp)
            return chain_extend(self.profile, authority_keys, lp, prev)
        if prev is None:
            acc = bloom_new(self.config.chain_capacity, self.config.chain_fpr)
        else:
            acc = prev
        acc = bloom_insert(self.profile, acc, proof_digest(self.profile, lp))
        return sign_accumulator(self.profile, authority_keys, acc)

    # -- presentation and audit ------------------------------------------------

    def _audit_presentation(self):
        reveal = self.scenario.reveal
        chain = ProvenanceChain(self.scenario.scheme, tuple(self.presented))
        positions = reveal.get("positions")
        if positions in (None, "all"):
            positions = list(range(1, len(self.presented) + 1))
        disclose = {int(k): v for k, v in reveal.get("disclose", {}).items()}
        sub = make_revealed_subsequence(self.profile, chain, positions, disclose)

        order = reveal.get("presentation_order")
        if order:
            by_position = {r.position: r for r in sub.entries}
            sub = dataclass_replace(
                sub, entries=tuple(by_position[p] for p in order))

        claims = self._build_claims(sub)
        report = audit(
            self.profile, claims, sub, self.world.directory.pubkeys(),
            self.world.registry,
            endorsement_window_ms=self.config.endorsement_window_ms,
            epoch_len_ms=self.config.epoch_len_ms,
        )
        return report, sub, claims

    def _build_claims(self, sub) -> list[LocationClaim]:
        spec = self.scenario.claims
        if spec == "truthful":
            claims = []
            for revealed in sub.entries:
                stmt = revealed.entry.elp.proof.statement
                if revealed.disclosed:
                    location = revealed.disclosed[0][1]
                else:
                    location = stmt.location_id
                claims.append(LocationClaim(location, stmt.visit_time))
            return claims
        if isinstance(spec, list):
            return [LocationClaim(c["location_id"], c["visit_time"]) for c in spec]
        raise ScriptError(f"unknown claims spec {spec!r}")


def run_scenario(scenario: Scenario) -> ScenarioOutcome:
    """Execute one scenario deterministically and audit the result."""
    return _Runner(scenario).run()


# ---------------------------------------------------------------------------
# Built-in suite
# ---------------------------------------------------------------------------

def _std_actors(*, user_honest=True, authority_honest=True,
                authority_behavior=None, witness_honest=True,
                witness_behavior=None, extra=()) -> list[ActorSpec]:
    actors = [
        ActorSpec("u1", "user", honest=user_honest, location="cafe-7"),
        ActorSpec("cafe-7", "authority", honest=authority_honest,
                  behavior=authority_behavior or {}),
        ActorSpec("lib-2", "authority"),
        ActorSpec("park-9", "authority"),
        ActorSpec("w1", "witness", honest=witness_honest,
                  behavior=witness_behavior or {}, location="cafe-7"),
    ]
    actors.extend(extra)
    return actors


def _tour(*stops: str, user="u1", witness="w1", gap_ms=5_000,
          attack=False) -> list[dict]:
    script: list[dict] = []
    for stop in stops:
        script.append({"op": "move", "party": user, "location": stop})
        script.append({"op": "move", "party": witness, "location": stop})
        visit = {"op": "visit", "user": user, "location": stop, "witness": witness}
        if attack:
            visit["attack"] = True
        script.append(visit)
        script.append({"op": "advance", "ms": gap_ms})
    return script


def builtin_suite(scheme: str, seed: int = 20_260_811) -> list[Scenario]:
    """Every threat-matrix row plus the named attacks, for one ordering
    scheme. Expectations follow the security analysis: everything is
    detected or prevented except post-dating and the doppelganger."""
    scenarios: list[Scenario] = []

    def add(name: str, **kwargs) -> None:
        scenarios.append(Scenario(
            name=f"{name}-{scheme}", seed=seed + len(scenarios),
            scheme=scheme, **kwargs))

    # Row ULW: everyone honest; includes blinded granularities and a
    # partially revealed chain.
    add(
        "honest-baseline",
        threat_row="ULW", attack="none",
        description="all-honest multi-stop tour, partial disclosure",
        actors=[
            ActorSpec("u1", "user", location="cafe-7"),
            ActorSpec("cafe-7", "authority",
                      granularities=["IL", "Chicago", "Block 5"]),
            ActorSpec("lib-2", "authority"),
            ActorSpec("park-9", "authority"),
            ActorSpec("w1", "witness", location="cafe-7"),
        ],
        script=_tour("cafe-7", "lib-2", "park-9", "lib-2"),
        reveal={"positions": [1, 2, 4], "disclose": {1: [2]}},
        expected_detection=False,
    )

    # Row uLW: malicious user, everyone else honest.
    add(
        "false-presence",
        threat_row="uLW", attack="false-presence",
        description="user fabricates a proof and endorsement from thin air",
        actors=_std_actors(user_honest=False),
        script=[
            {"op": "advance", "ms": 2_000},
            {"op": "fabricate_visit", "user": "u1", "location": "lib-2",
             "witness": "w1", "forge_authority": True, "forge_witness": True},
        ],
        expected_detection=True,
        notes="an honest authority will not sign for an absent user, so the "
              "user must forge the signatures; forgeries fail verification",
    )

    add(
        "reordering",
        threat_row="uLW", attack="reordering",
        description="user presents genuine entries in a swapped order",
        actors=_std_actors(user_honest=False),
        script=_tour("cafe-7", "lib-2", "park-9"),
        # per-entry claims stay truthful; the forged presentation order is
        # the attack
        reveal={"positions": [2, 3], "presentation_order": [3, 2]},
        expected_detection=True,
    )

    add(
        "proof-switching",
        threat_row="uLW", attack="proof-switching",
        description="genuine proof rebound to another entry's endorsement",
        actors=_std_actors(user_honest=False),
        script=_tour("cafe-7", "lib-2") + [
            {"op": "switch_proof", "proof_from": 1, "endorsements_from": 2},
        ],
        expected_detection=True,
    )

    add(
        "denial-of-presence",
        threat_row="uLW", attack="denial-of-presence",
        description="user withholds a visited location from the auditor",
        actors=_std_actors(user_honest=False),
        script=_tour("cafe-7", "lib-2", "park-9"),
        reveal={"positions": [1, 3]},
        expected_detection=False,
        notes="selective disclosure is a feature: nothing forces the user "
              "to reveal the middle stop, and the rest still verifies",
    )

    add(
        "doppelganger",
        threat_row="uLW", attack="doppelganger",
        description="user shares keys with an accomplice who collects a "
                    "genuine proof elsewhere",
        actors=_std_actors(user_honest=False, extra=(
            ActorSpec("w2", "witness", location="lib-2"),)),
        script=_tour("cafe-7") + [
            {"op": "clone", "identity": "u1", "location": "lib-2"},
            {"op": "visit", "user": "u1", "location": "lib-2",
             "witness": "w2", "attack": True},
        ],
        expected_detection=False,
        notes="every signature is genuine because the clone holds the real "
              "keys; telling devices apart needs radiometric fingerprinting, "
              "which is out of scope",
    )

    add(
        "chain-fork-mixed",
        threat_row="uLW", attack="chain-fork",
        description="user replays an old ordering construct to fork her "
                    "chain, then mixes both branches in one presentation",
        actors=_std_actors(user_honest=False),
        script=_tour("cafe-7", "lib-2", "park-9") + [
            {"op": "replay_construct", "user": "u1", "position": 1},
            {"op": "move", "party": "u1", "location": "lib-2"},
            {"op": "move", "party": "w1", "location": "lib-2"},
            {"op": "visit", "user": "u1", "location": "lib-2",
             "witness": "w1", "attack": True},
        ],
        reveal={"positions": [2, 4]},
        expected_detection=True,
        notes="the forked entry descends from position 1, so evidence "
              "mixing it with the main branch cannot verify",
    )

    add(
        "chain-fork-hidden",
        threat_row="uLW", attack="chain-fork",
        description="forked chain presented as a self-consistent view "
                    "that hides the abandoned branch",
        actors=_std_actors(user_honest=False),
        script=_tour("cafe-7", "lib-2", "park-9") + [
            {"op": "replay_construct", "user": "u1", "position": 1},
            {"op": "move", "party": "u1", "location": "lib-2"},
            {"op": "move", "party": "w1", "location": "lib-2"},
            {"op": "visit", "user": "u1", "location": "lib-2",
             "witness": "w1", "attack": True},
            {"op": "drop_presented", "positions": [2, 3]},
        ],
        expected_detection=False,
        notes="a single fork branch is internally consistent; nothing ties "
              "a user to one canonical chain head, so audits cannot catch a "
              "fork unless branches are mixed in one presentation",
    )

    # Row Ul(bar)W: malicious location authority, honest user and witness.
    add(
        "authority-false-time",
        threat_row="UlW", attack="false-time",
        description="authority stamps the visit far in the past; the honest "
                    "witness refuses the implausible timestamp",
        actors=_std_actors(authority_honest=False, authority_behavior={
            "visit_time_shift_ms": -120_000}),
        script=[
            {"op": "advance", "ms": 400_000},
            {"op": "move", "party": "u1", "location": "cafe-7"},
            {"op": "move", "party": "w1", "location": "cafe-7"},
            {"op": "visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "attack": True},
        ],
        expected_detection=True,
        notes="prevented rather than audited: the endorsement window check "
              "stops the false-time proof from ever being endorsed",
    )

    # Row ULw(bar): malicious witness, everyone else honest.
    add(
        "lazy-witness",
        threat_row="ULw", attack="skipped-localization",
        description="witness endorses without checking co-location, but the "
                    "user really is present",
        actors=_std_actors(witness_honest=False,
                           witness_behavior={"skip_localization": True}),
        script=_tour("cafe-7", "lib-2"),
        expected_detection=False,
        notes="a lone malicious witness can at worst refuse service; a "
              "truthful endorsement of a real visit harms nobody",
    )

    # Row ul(bar)W: user and location collude, witness honest.
    add(
        "offline-fake-proof",
        threat_row="ulW", attack="false-presence",
        description="user and location mint a proof while the user is "
                    "absent; the honest witness refuses, so they forge the "
                    "endorsement",
        actors=_std_actors(user_honest=False, authority_honest=False,
                           authority_behavior={"skip_localization": True}),
        script=[
            {"op": "advance", "ms": 2_000},
            {"op": "move", "party": "u1", "location": "far-away"},
            {"op": "move", "party": "w1", "location": "cafe-7"},
            # the colluding authority signs anyway, but the protocol visit
            # dies at the honest witness's co-location check
            {"op": "visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "attack": True},
            # so the colluders assemble the endorsement themselves
            {"op": "fabricate_visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "forge_authority": False, "forge_witness": True,
             "record_epoch": True},
        ],
        expected_detection=True,
        notes="the witness signature is the one thing the colluding pair "
              "cannot produce",
    )

    add(
        "backdating",
        threat_row="ulW", attack="backdating",
        description="colluders stamp a proof 50 s into the just-closed "
                    "epoch; the published report cannot contain it",
        actors=_std_actors(user_honest=False, authority_honest=False,
                           authority_behavior={
                               "visit_time_shift_ms": -50_000}),
        script=[
            # park just past an epoch boundary so the shifted timestamp
            # lands in the closed epoch while staying inside the
            # endorsement window of the honest witness
            {"op": "advance", "ms": 330_000},
            {"op": "move", "party": "u1", "location": "cafe-7"},
            {"op": "move", "party": "w1", "location": "cafe-7"},
            {"op": "visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "attack": True},
        ],
        expected_detection=True,
        notes="the honest witness tolerates a 50 s gap, but the closed "
              "epoch's accumulator was published before the proof existed",
    )

    # Row uLw(bar): user and witness collude, location honest.
    add(
        "false-endorsement",
        threat_row="uLw", attack="false-endorsement",
        description="witness endorses an absent user, but the honest "
                    "location never signed a proof, so one is forged",
        actors=_std_actors(user_honest=False, witness_honest=False,
                           witness_behavior={"skip_localization": True,
                                             "ignore_time_checks": True}),
        script=[
            {"op": "advance", "ms": 2_000},
            {"op": "fabricate_visit", "user": "u1", "location": "lib-2",
             "witness": "w1", "forge_authority": True, "forge_witness": False},
        ],
        expected_detection=True,
        notes="with an honest location authority there is nothing real to "
              "endorse; the forged proof signature gives the pair away",
    )

    # Row Ul(bar)w(bar): location and witness collude to implicate a user.
    add(
        "implication",
        threat_row="Ulw", attack="implication",
        description="location and witness fabricate a past visit for a "
                    "user who never participated",
        actors=_std_actors(authority_honest=False, witness_honest=False,
                           witness_behavior={"skip_localization": True,
                                             "ignore_time_checks": True}),
        script=[
            # u1 is never anywhere near cafe-7 and takes no part; the
            # colluders sign everything themselves, claiming a visit in
            # the previous (already reported) epoch
            {"op": "advance", "ms": 400_000},
            {"op": "fabricate_visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "forge_authority": False,
             "forge_witness": False, "visit_time_shift_ms": -350_000,
             "record_epoch": True},
        ],
        expected_detection=True,
        notes="framing a user for a past visit fails against the "
              "already-published epoch report; framing in the live epoch "
              "is blocked by key-bound secure localization, which the "
              "localization oracle abstracts away",
    )

    # Row ul(bar)w(bar): everyone colludes.
    add(
        "future-dating",
        threat_row="ulw", attack="future-dating",
        description="all three collude on a proof stamped into the next "
                    "epoch without managing the epoch record",
        actors=_std_actors(user_honest=False, authority_honest=False,
                           witness_honest=False,
                           authority_behavior={
                               "skip_localization": True,
                               "visit_time_shift_ms": 400_000,
                               "timestamp_shift_ms": 400_000},
                           witness_behavior={"skip_localization": True,
                                             "ignore_time_checks": True}),
        script=[
            {"op": "advance", "ms": 2_000},
            {"op": "move", "party": "u1", "location": "cafe-7"},
            {"op": "move", "party": "w1", "location": "cafe-7"},
            {"op": "visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "attack": True},
        ],
        expected_detection=True,
        notes="the digest lands in the minting epoch's report, not the "
              "claimed one, and the mismatch shows",
    )

    add(
        "post-dating",
        threat_row="ulw", attack="post-dating",
        description="all three collude on a future-dated proof AND "
                    "premeditate its epoch record for the target epoch",
        actors=_std_actors(user_honest=False, authority_honest=False,
                           witness_honest=False,
                           authority_behavior={
                               "skip_localization": True,
                               "visit_time_shift_ms": 400_000,
                               "timestamp_shift_ms": 400_000,
                               "defer_record_to_visit_epoch": True},
                           witness_behavior={"skip_localization": True,
                                             "ignore_time_checks": True}),
        script=[
            {"op": "advance", "ms": 2_000},
            {"op": "move", "party": "u1", "location": "cafe-7"},
            {"op": "move", "party": "w1", "location": "cafe-7"},
            {"op": "visit", "user": "u1", "location": "cafe-7",
             "witness": "w1", "attack": True},
        ],
        expected_detection=False,
        notes="documented gap: when the issuing authority itself caches the "
              "proof and publishes its digest in the premeditated future "
              "epoch, every check the auditor can run comes back clean",
    )

    return scenarios


def run_builtin_suite(seed: int = 20_260_811) -> list[ScenarioOutcome]:
    """Run the whole matrix under both ordering schemes."""
    outcomes = []
    for scheme in (SCHEME_HASHCHAIN, SCHEME_BLOOM):
        for scenario in builtin_suite(scheme, seed=seed):
            outcomes.append(run_scenario(scenario))
    return outcomes


def suite_summary(outcomes: list[ScenarioOutcome]) -> str:
    lines = []
    for o in outcomes:
        status = "matched" if o.matched else "MISMATCH"
        how = ("prevented" if o.prevented
               else ("audit-flagged" if not o.audit_report.ok else "clean"))
        label = f" [{o.threat_label}]" if o.threat_label else ""
        lines.append(f"{o.scenario:40s} {how:14s}{label:30s} {status}")
    return "\n".join(lines)


def scenario_to_json(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), indent=2, sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    return Scenario.from_dict(json.loads(text))

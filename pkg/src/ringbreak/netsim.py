"""Synchronous lockstep execution over point-to-point secure channels.

Round r has a send phase and a receive phase: every active party emits its
round-r messages as a function of state alone, then all round-r messages are
delivered and become visible to the round-(r+1) step calls. There is no
broadcast primitive; a message travels on exactly one directed edge, and the
adversary sees only traffic addressed to corrupted parties (secure channels).
Delivery is non-rushing: corrupted parties' round-r messages are produced
before the adversary sees any honest round-r message.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .core import (
    BOT,
    RUNNING,
    CoinStream,
    JointEntry,
    JointInput,
    ProtocolSpec,
    SpecViolation,
    TopologyViolation,
    derive_coins,
    derive_seed,
    outcome_repr,
)
from .stats import wilson_interval

DEFAULT_MESSAGE_CAP = 4096


@dataclass(frozen=True)
class Topology:
    """Directed-symmetric communication graph; no self loops."""

    n: int
    edges: frozenset[tuple[int, int]]  # unordered pairs stored as sorted tuples

    @staticmethod
    def complete(n: int) -> "Topology":
        return Topology(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    @staticmethod
    def cycle(n: int) -> "Topology":
        if n < 3:
            raise ValueError("cycle needs >= 3 nodes")
        return Topology(n, frozenset(tuple(sorted((i, (i + 1) % n))) for i in range(n)))

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return (min(u, v), max(u, v)) in self.edges

    def neighbors(self, u: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == u:
                out.append(b)
            elif b == u:
                out.append(a)
        return sorted(out)


# Transcript record: (round, sender, receiver, payload).
TranscriptRecord = tuple[int, int, int, bytes]


@dataclass
class ExecutionResult:
    """Everything observable about one finished (or cut-off) execution."""

    n: int
    corrupted: frozenset[int]
    outcomes: list[Any]            # Outcome | RUNNING for honest, None for corrupted
    halt_rounds: list[Optional[int]]
    rounds: int                    # send-phase rounds executed
    transcript: Optional[list[TranscriptRecord]]
    pre_announced: Optional[bytes] = None
    adversary_output: Optional[bytes] = None
    adv_view_log: Optional[list[tuple[int, tuple]]] = None
    probe_violations: list[str] = field(default_factory=list)

    def honest(self) -> list[int]:
        return [i for i in range(self.n) if i not in self.corrupted]

    def honest_outcomes(self) -> list[Any]:
        return [self.outcomes[i] for i in self.honest()]


class AdversaryContext:
    """What the adversary legitimately starts with: aux input, corrupted
    parties' inputs/coins, and its own seeded randomness."""

    def __init__(self, aux: Any, entries: dict[int, JointEntry], seed: int, n: int):
        self.aux = aux
        self.entries = entries
        self.seed = seed
        self.n = n
        self.coins = derive_coins(seed, b"adversary")

    def derive(self, label: bytes) -> CoinStream:
        return derive_coins(self.seed, label)


class AdversaryStrategy:
    """Round-driven adversary controlling a fixed corrupted set.

    `step` is called once per round with the messages addressed to corrupted
    parties in the previous round; the returned outbound maps directed edges
    (corrupted sender, receiver) to payloads for this round. pre_announce is
    read once, before any message has been seen.
    """

    corrupted: frozenset[int] = frozenset()

    def describe(self) -> str:
        return type(self).__name__

    def init(self, ctx: AdversaryContext) -> Any:
        return None

    def pre_announce(self, state: Any) -> Optional[bytes]:
        return None

    def step(self, state: Any, round_no: int,
             inbound: dict[tuple[int, int], bytes]) -> tuple[Any, dict[tuple[int, int], bytes]]:
        return state, {}

    def final_output(self, state: Any) -> bytes:
        return b""


class PassiveAdversary(AdversaryStrategy):
    """Corrupted parties follow the protocol exactly; adversary only watches."""

    def __init__(self, spec: ProtocolSpec, corrupted: frozenset[int]):
        self.spec = spec
        self.corrupted = frozenset(corrupted)

    def init(self, ctx: AdversaryContext):
        members = {}
        for i in sorted(self.corrupted):
            entry = ctx.entries[i]
            prog = self.spec.programs[i]
            members[i] = (prog, prog.init(entry.input, entry.coins(ctx.seed)))
        return members

    def step(self, state, round_no, inbound):
        outbound = {}
        new_state = {}
        for i, (prog, pstate) in state.items():
            if prog.finished(pstate) is not None:
                new_state[i] = (prog, pstate)
                continue
            inbox = {src: payload for (src, dst), payload in inbound.items() if dst == i}
            pstate, outbox = prog.step(pstate, round_no, inbox)
            new_state[i] = (prog, pstate)
            for dst, payload in outbox.items():
                outbound[(i, dst)] = payload
        return new_state, outbound


class EquivocatorAdversary(AdversaryStrategy):
    """Round-1 equivocation: tells the lowest honest party 0 and the rest 1."""

    def __init__(self, corrupted_party: int, n: int):
        self.corrupted = frozenset([corrupted_party])
        self.n = n

    def init(self, ctx: AdversaryContext):
        return None

    def step(self, state, round_no, inbound):
        if round_no != 1:
            return state, {}
        c = min(self.corrupted)
        honest = [i for i in range(self.n) if i != c]
        out = {}
        for rank, i in enumerate(sorted(honest)):
            out[(c, i)] = bytes([0 if rank == 0 else 1])
        return state, out


def _route_check(topology: Topology, src: int, dst: int, payload: bytes, cap: int) -> None:
    if dst == src or not topology.has_edge(src, dst):
        raise TopologyViolation(f"no edge {src}->{dst}")
    if len(payload) > cap:
        raise SpecViolation(f"message {src}->{dst} exceeds {cap} byte cap ({len(payload)})")
    if not isinstance(payload, bytes):
        raise SpecViolation(f"message {src}->{dst} is not bytes")


def _execute(
    spec: ProtocolSpec,
    joint: JointInput | dict[int, JointEntry],
    seed: int,
    *,
    adversary: Optional[AdversaryStrategy] = None,
    aux: Any = None,
    max_rounds: Optional[int] = None,
    topology: Optional[Topology] = None,
    record: bool = False,
    probe_halted: bool = False,
    enforce_round_bound: bool = True,
    message_cap: int = DEFAULT_MESSAGE_CAP,
) -> ExecutionResult:
    n = spec.n
    topo = topology or Topology.complete(n)
    corrupted = adversary.corrupted if adversary is not None else frozenset()
    if max_rounds is None:
        max_rounds = 4 * spec.q if spec.round_bound.strict else 64 * spec.q

    if isinstance(joint, JointInput):
        entries = {i: joint[i] for i in range(n)}
    else:
        entries = dict(joint)
    for i in range(n):
        if i not in corrupted and i not in entries:
            raise ValueError(f"missing JointEntry for honest party {i}")

    states: dict[int, Any] = {}
    outcomes: list[Any] = [None] * n
    halt_rounds: list[Optional[int]] = [None] * n
    probe_violations: list[str] = []
    for i in range(n):
        if i in corrupted:
            continue
        prog = spec.programs[i]
        states[i] = prog.init(entries[i].input, entries[i].coins(seed))
        fin = prog.finished(states[i])
        if fin is not None:
            outcomes[i] = fin
            halt_rounds[i] = 0

    adv_state = None
    pre_announced = None
    adv_view_log: Optional[list] = [] if (record and adversary is not None) else None
    if adversary is not None:
        ctx = AdversaryContext(aux, {i: entries[i] for i in corrupted if i in entries}, seed, n)
        adv_state = adversary.init(ctx)
        pre_announced = adversary.pre_announce(adv_state)

    transcript: Optional[list[TranscriptRecord]] = [] if record else None
    pending: dict[int, dict[int, bytes]] = {}
    adv_pending: dict[tuple[int, int], bytes] = {}
    honest_ids = [i for i in range(n) if i not in corrupted]
    strict_q = spec.q if (spec.round_bound.strict and enforce_round_bound) else None

    r = 0
    rounds_executed = 0
    # with probe_halted we run one round past the last halt so post-halt
    # sends and outcome drift have a chance to show up
    probe_rounds_left = 1 if probe_halted else 0
    while True:
        if all(outcomes[i] is not None for i in honest_ids):
            if probe_rounds_left <= 0:
                break
            probe_rounds_left -= 1
        r += 1
        flush = r > max_rounds
        sends: list[tuple[int, int, bytes]] = []

        for i in honest_ids:
            halted = outcomes[i] is not None
            if halted and not probe_halted:
                continue
            inbox = pending.get(i, {})
            state2, outbox = spec.programs[i].step(states[i], r, inbox)
            if halted:
                # contract probe only: nothing a halted party does is delivered
                if outbox:
                    probe_violations.append(f"party {i} active after halt (round {r})")
                fin = spec.programs[i].finished(state2)
                if fin != outcomes[i]:
                    probe_violations.append(f"party {i} outcome drift after halt (round {r})")
                states[i] = state2
                continue
            states[i] = state2
            for dst, payload in outbox.items():
                _route_check(topo, i, dst, payload, message_cap)
                sends.append((i, dst, payload))

        if adversary is not None:
            inbound = dict(adv_pending)
            if adv_view_log is not None:
                adv_view_log.append(
                    (r, tuple(sorted((s, d, p) for (s, d), p in inbound.items())))
                )
            adv_state, outbound = adversary.step(adv_state, r, inbound)
            for (src, dst), payload in outbound.items():
                if src not in corrupted:
                    raise TopologyViolation(f"adversary sent from honest party {src}")
                _route_check(topo, src, dst, payload, message_cap)
                sends.append((src, dst, payload))

        for i in honest_ids:
            if outcomes[i] is None:
                fin = spec.programs[i].finished(states[i])
                if fin is not None:
                    outcomes[i] = fin
                    halt_rounds[i] = min(r, max_rounds)

        if strict_q is not None and r >= strict_q + 1:
            laggards = [i for i in honest_ids if outcomes[i] is None]
            if laggards:
                raise SpecViolation(
                    f"{spec.name}: parties {laggards} unfinished at declared round bound {strict_q}"
                )

        if flush:
            break
        rounds_executed = r

        pending = {}
        adv_pending = {}
        for src, dst, payload in sends:
            if transcript is not None:
                transcript.append((r, src, dst, payload))
            if dst in corrupted:
                adv_pending[(src, dst)] = payload
            else:
                pending.setdefault(dst, {})[src] = payload

    for i in honest_ids:
        if outcomes[i] is None:
            outcomes[i] = RUNNING

    adv_output = adversary.final_output(adv_state) if adversary is not None else None
    return ExecutionResult(
        n=n,
        corrupted=corrupted,
        outcomes=outcomes,
        halt_rounds=halt_rounds,
        rounds=rounds_executed,
        transcript=transcript,
        pre_announced=pre_announced,
        adversary_output=adv_output,
        adv_view_log=adv_view_log,
        probe_violations=probe_violations,
    )


def run_honest(spec: ProtocolSpec, joint: JointInput, seed: int, *,
               max_rounds: Optional[int] = None, topology: Optional[Topology] = None,
               record: bool = False, probe_halted: bool = False,
               enforce_round_bound: bool = True,
               message_cap: int = DEFAULT_MESSAGE_CAP) -> ExecutionResult:
    """All-honest lockstep run from a JointInput and a master seed."""
    joint.validate(spec)
    return _execute(
        spec, joint, seed, max_rounds=max_rounds, topology=topology, record=record,
        probe_halted=probe_halted, enforce_round_bound=enforce_round_bound,
        message_cap=message_cap,
    )


def run_with_adversary(spec: ProtocolSpec, adversary: AdversaryStrategy,
                       joint: JointInput | dict[int, JointEntry], seed: int, *,
                       aux: Any = None, max_rounds: Optional[int] = None,
                       topology: Optional[Topology] = None, record: bool = False,
                       enforce_round_bound: bool = True,
                       message_cap: int = DEFAULT_MESSAGE_CAP) -> ExecutionResult:
    """Run with the adversary substituted for its corrupted parties.

    The adversary never observes honest-to-honest traffic; its view is the
    inbound bundles passed to step, which cover exactly the messages addressed
    to corrupted parties.
    """
    return _execute(
        spec, joint, seed, adversary=adversary, aux=aux, max_rounds=max_rounds,
        topology=topology, record=record, enforce_round_bound=enforce_round_bound,
        message_cap=message_cap,
    )


def check_consistency(result: ExecutionResult) -> bool:
    """True iff all honest outcomes are equal (BOT counts as a value).

    Raises if any honest party is still RUNNING: consistency of a cut-off
    execution is undefined.
    """
    outs = result.honest_outcomes()
    if any(o is RUNNING for o in outs):
        raise ValueError("consistency undefined: honest party still RUNNING")
    first = outs[0]
    return all(o == first for o in outs[1:])


@dataclass
class AdversaryEstimate:
    label: str
    trials: int
    failures: int
    delta_hat: float
    ci_low: float
    ci_high: float


@dataclass
class ConsistencyReport:
    spec_name: str
    trials: int
    per_adversary: list[AdversaryEstimate]
    pooled_trials: int
    pooled_failures: int
    delta_hat: float
    ci_low: float
    ci_high: float


def estimate_consistency(spec: ProtocolSpec, adversary_family: Sequence[AdversaryStrategy],
                         trials: int, seed: int, *,
                         max_rounds: Optional[int] = None) -> ConsistencyReport:
    """Monte-Carlo estimate of the inconsistency rate delta against a family.

    Honest inputs are drawn uniformly from the declared domains and every
    trial gets an independently derived seed, so the whole report is a pure
    function of (spec, family, trials, seed).
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for a meaningful estimate")
    per = []
    pooled_fail = 0
    pooled_total = 0
    for a_idx, adv in enumerate(adversary_family):
        failures = 0
        for t in range(trials):
            tseed = derive_seed(seed, "consistency", a_idx, t)
            joint = JointInput.sample(spec, tseed)
            res = run_with_adversary(spec, adv, joint, tseed, max_rounds=max_rounds)
            if not check_consistency(res):
                failures += 1
        lo, hi = wilson_interval(failures, trials)
        per.append(AdversaryEstimate(adv.describe(), trials, failures, failures / trials, lo, hi))
        pooled_fail += failures
        pooled_total += trials
    lo, hi = wilson_interval(pooled_fail, pooled_total)
    return ConsistencyReport(
        spec_name=spec.name,
        trials=trials,
        per_adversary=per,
        pooled_trials=pooled_total,
        pooled_failures=pooled_fail,
        delta_hat=pooled_fail / pooled_total,
        ci_low=lo,
        ci_high=hi,
    )


def result_fingerprint(result: ExecutionResult) -> str:
    """Order-stable hash of outcomes plus transcript; replay equality check."""
    h = hashlib.sha256()
    for i, out in enumerate(result.outcomes):
        h.update(b"|%d=" % i + outcome_repr(out).encode())
    if result.transcript is not None:
        for rec in result.transcript:
            h.update(b"#%d:%d>%d:" % rec[:3] + rec[3])
    return h.hexdigest()


def transcript_to_jsonl(records: Sequence[TranscriptRecord]) -> str:
    """One JSON object per (round, edge) with hex payload; stable field order."""
    lines = []
    for rnd, src, dst, payload in records:
        lines.append(json.dumps(
            {"round": rnd, "from": src, "to": dst, "payload": payload.hex()},
            sort_keys=False, separators=(",", ":"),
        ))
    return "\n".join(lines) + ("\n" if lines else "")

"""Ring composition of a 3-party protocol, and the attacks built on it.

A ring run chains m copies of the roles A,B,C of a 3-party protocol around a
cycle of 3m slots (A1 B1 C1 A2 ... Cm). Each slot runs its role's unmodified
program with its neighbor ids relabeled, so locally every slot sees a
perfectly ordinary 3-party execution. Information travels one hop per round,
so any slot's view over r rounds is determined by the slots within distance r;
that locality is what the bridging adversaries below exploit: they drop real
honest parties into adjacent slots and simulate the whole remaining ring,
committing to the far slot's output before the first message is sent.

The n-party reduction partitions the parties into three groups and fuses each
group into one super-party, turning any n-party protocol into a 3-party one
with the same round structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .core import (
    BOT,
    RUNNING,
    ConfigError,
    FusedInput,
    JointEntry,
    JointInput,
    PartyProgram,
    ProtocolSpec,
    RoundBound,
    SpecViolation,
    TopologyViolation,
    derive_coins,
    derive_seed,
)
from .netsim import (
    AdversaryContext,
    AdversaryStrategy,
    ExecutionResult,
    Topology,
    run_honest,
)

# Ring slots the real honest parties can occupy, over all corruption choices.
HONEST_WINDOW = (0, 1, 2, 3)


def ring_distance(size: int, u: int, v: int) -> int:
    """Minimal number of ring edges between two slots."""
    d = abs(u - v) % size
    return min(d, size - d)


class RingSlotProgram(PartyProgram):
    """Wraps one role's 3-party program for a ring slot.

    Translates between the program's local party ids {0,1,2} and the global
    slot indices of the two ring neighbors. The wrapped program never learns
    it is on a ring.
    """

    def __init__(self, base: PartyProgram, slot: int, size: int):
        role = slot % 3
        self.base = base
        self.slot = slot
        self.size = size
        self.pred = (slot - 1) % size
        self.succ = (slot + 1) % size
        self.pred_role = (role - 1) % 3
        self.succ_role = (role + 1) % 3
        self.role_id = f"s{slot}:{base.role_id}"

    def init(self, input_bytes, coins):
        return self.base.init(input_bytes, coins)

    def step(self, state, round_no, inbox):
        local = {}
        for src, payload in inbox.items():
            if src == self.pred:
                local[self.pred_role] = payload
            elif src == self.succ:
                local[self.succ_role] = payload
            else:
                raise TopologyViolation(f"slot {self.slot} received from non-neighbor {src}")
        state, outbox = self.base.step(state, round_no, local)
        out = {}
        for dst, payload in outbox.items():
            if dst == self.pred_role:
                out[self.pred] = payload
            elif dst == self.succ_role:
                out[self.succ] = payload
            else:
                raise SpecViolation(f"slot {self.slot} sent to unmapped local id {dst}")
        return state, out

    def finished(self, state):
        return self.base.finished(state)


@dataclass(frozen=True)
class RingNetwork:
    """m chained copies of a 3-party protocol on a 3m-cycle."""

    spec3: ProtocolSpec
    m: int

    def __post_init__(self):
        if self.spec3.n != 3:
            raise ConfigError("ring composition needs a 3-party protocol")
        if self.m < 2:
            raise ConfigError("need at least m=2 copies")

    @property
    def size(self) -> int:
        return 3 * self.m

    def role_of(self, slot: int) -> int:
        return slot % 3

    def copy_of(self, slot: int) -> int:
        return slot // 3 + 1

    def slot_of(self, role: int, copy: int) -> int:
        return 3 * (copy - 1) + role

    def distance(self, u: int, v: int) -> int:
        return ring_distance(self.size, u, v)

    def slot_program(self, slot: int, base: Optional[PartyProgram] = None) -> RingSlotProgram:
        return RingSlotProgram(base or self.spec3.programs[slot % 3], slot, self.size)

    def engine_spec(self, overrides: Optional[dict[int, PartyProgram]] = None) -> ProtocolSpec:
        """ProtocolSpec over all slots, optionally with replaced slot programs."""
        overrides = overrides or {}
        programs = tuple(
            self.slot_program(s, overrides.get(s)) for s in range(self.size)
        )
        domains = tuple(self.spec3.domains[s % 3] for s in range(self.size))
        return ProtocolSpec(
            name=f"ring({self.spec3.name},m={self.m})",
            programs=programs,
            round_bound=self.spec3.round_bound,
            domains=domains,
        )

    def zeros_w(self, label_prefix: bytes = b"ring") -> JointInput:
        return JointInput(tuple(
            JointEntry(self.spec3.domains[s % 3].zero(), label_prefix + b"/%d" % s)
            for s in range(self.size)
        ))

    def sample_w(self, seed: int, label_prefix: bytes = b"ring") -> JointInput:
        src = derive_coins(seed, b"ring-input-sample")
        return JointInput(tuple(
            JointEntry(self.spec3.domains[s % 3].sample(src, offset=128 * s),
                       label_prefix + b"/%d" % s)
            for s in range(self.size)
        ))


def build_ring(spec3: ProtocolSpec, m: int) -> RingNetwork:
    return RingNetwork(spec3, m)


def emulate_ring(ring: RingNetwork, w: JointInput, rounds_cap: int, seed: int, *,
                 record: bool = False,
                 overrides: Optional[dict[int, PartyProgram]] = None) -> ExecutionResult:
    """Honest lockstep run of the ring, cut off after rounds_cap rounds.

    Slots that have not produced an Outcome by the cap are reported RUNNING;
    the declared round bound is deliberately not enforced here because rings
    are the attack surface, not the protocol under test.
    """
    spec = ring.engine_spec(overrides)
    return run_honest(
        spec, w, seed,
        max_rounds=rounds_cap,
        topology=Topology.cycle(ring.size),
        record=record,
        enforce_round_bound=False,
    )


def node_records(result: ExecutionResult, node: int) -> list:
    """Transcript records incident to one node (its local traffic view)."""
    if result.transcript is None:
        raise ValueError("run was not recorded")
    return [rec for rec in result.transcript if rec[1] == node or rec[2] == node]


def node_view(result: ExecutionResult, node: int) -> bytes:
    """Canonical bytes of a node's local traffic plus its outcome."""
    from .core import outcome_repr

    lines = [b"%d|%d|%d|" % rec[:3] + rec[3].hex().encode() for rec in node_records(result, node)]
    lines.append(b"out|" + outcome_repr(result.outcomes[node]).encode())
    return b"\n".join(lines)


def _best_far_slot(size: int) -> tuple[int, int]:
    """Slot maximizing the minimal ring distance to the honest window."""
    best_slot, best_d = 0, -1
    for s in range(size):
        d = min(ring_distance(size, s, h) for h in HONEST_WINDOW)
        if d > best_d:
            best_slot, best_d = s, d
    return best_slot, best_d


def attack_ring_size(q: int, variant: str) -> int:
    """Number of copies m so the far slot is outside honest influence range.

    Influence travels one hop per round, so the pre-committed slot must sit
    more than q hops (strict) or m hops (expected, where the cap is m) from
    every slot a real honest party might occupy.
    """
    if variant == "strict":
        m = max(4, q + (q % 2))
        while _best_far_slot(3 * m)[1] <= q:
            m += 2
    elif variant == "expected":
        m = max(6, 2 * q)
        while _best_far_slot(3 * m)[1] <= m:
            m += 2
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    return m


@dataclass
class AttackPhase1Result:
    """Outcome of the offline ring run(s) that pre-commit the forced value."""

    variant: str
    m: int
    q: int
    pstar: int
    pstar_distance: int
    y_star: Optional[bytes]
    w: JointInput
    seed: int                 # execution seed of the selected iteration
    iterations_used: int
    aborted: bool
    pstar_halt_round: Optional[int]
    ring: RingNetwork = field(repr=False, default=None)


def phase1_strict(spec3: ProtocolSpec, seed: int, q: Optional[int] = None) -> AttackPhase1Result:
    """One offline ring emulation on fixed w; P*'s output becomes y*."""
    if spec3.n != 3:
        raise ConfigError("phase 1 runs on a 3-party protocol")
    q = q if q is not None else spec3.q
    m = attack_ring_size(q, "strict")
    ring = build_ring(spec3, m)
    pstar, dist = _best_far_slot(ring.size)
    exec_seed = derive_seed(seed, "phase1", 1)
    w = ring.zeros_w()
    res = emulate_ring(ring, w, rounds_cap=m, seed=exec_seed)
    y = res.outcomes[pstar]
    if y is RUNNING:
        raise SpecViolation("phase 1: far slot still RUNNING at the strict bound")
    return AttackPhase1Result(
        variant="strict", m=m, q=q, pstar=pstar, pstar_distance=dist,
        y_star=y, w=w, seed=exec_seed, iterations_used=1, aborted=False,
        pstar_halt_round=res.halt_rounds[pstar], ring=ring,
    )


def phase1_expected(spec3: ProtocolSpec, q_expected: int, z: int, seed: int) -> AttackPhase1Result:
    """Repeat the offline ring run until P* halts within m rounds.

    Each iteration uses fresh coins; at most z iterations are attempted. An
    iteration where P* has not halted by round m is discarded, so by Markov
    each iteration succeeds with probability at least 1/2 for a protocol with
    expected round complexity q_expected, and Pr[abort] <= 2^-z.
    """
    if spec3.n != 3:
        raise ConfigError("phase 1 runs on a 3-party protocol")
    if z < 1:
        raise ConfigError("need z >= 1 iterations")
    m = attack_ring_size(q_expected, "expected")
    ring = build_ring(spec3, m)
    pstar, dist = _best_far_slot(ring.size)
    w = ring.zeros_w()
    last_seed = None
    for it in range(1, z + 1):
        exec_seed = derive_seed(seed, "phase1", it)
        last_seed = exec_seed
        res = emulate_ring(ring, w, rounds_cap=m, seed=exec_seed)
        y = res.outcomes[pstar]
        if y is not RUNNING:
            return AttackPhase1Result(
                variant="expected", m=m, q=q_expected, pstar=pstar, pstar_distance=dist,
                y_star=y, w=w, seed=exec_seed, iterations_used=it, aborted=False,
                pstar_halt_round=res.halt_rounds[pstar], ring=ring,
            )
    return AttackPhase1Result(
        variant="expected", m=m, q=q_expected, pstar=pstar, pstar_distance=dist,
        y_star=None, w=w, seed=last_seed, iterations_used=z, aborted=True,
        pstar_halt_round=None, ring=ring,
    )


def honest_slot_map(corrupted: frozenset[int]) -> dict[int, int]:
    """Which ring slot each real honest party occupies, per corrupted set.

    Honest parties always land on adjacent slots whose roles match their own,
    inside the fixed window near copy 1.
    """
    table = {
        frozenset({2}): {0: 0, 1: 1},
        frozenset({0}): {1: 1, 2: 2},
        frozenset({1}): {2: 2, 0: 3},
        frozenset({0, 1}): {2: 2},
        frozenset({1, 2}): {0: 0},
        frozenset({0, 2}): {1: 1},
    }
    key = frozenset(corrupted)
    if key not in table:
        raise ConfigError(f"corrupted set {sorted(corrupted)} not a proper subset of 3 parties")
    return table[key]


class VirtualRing:
    """Adversary-internal emulation of the ring minus the real parties' slots.

    Stepped once per real round, in lockstep. Messages from the real parties
    are fed in as if sent by their slots; messages virtual slots address to
    those slots are returned for the adversary to deliver over real channels.
    """

    def __init__(self, ring: RingNetwork, entries: dict[int, JointEntry], seed: int,
                 external: dict[int, int], round_cap: Optional[int] = None):
        self.ring = ring
        self.external = external  # slot -> real party id
        self.round_cap = round_cap
        self.truncated = False
        self.programs: dict[int, RingSlotProgram] = {}
        self.states: dict[int, Any] = {}
        self.done: dict[int, bool] = {}
        self.halt_rounds: dict[int, int] = {}
        self.pending: dict[int, dict[int, bytes]] = {}
        for s in range(ring.size):
            if s in external:
                continue
            prog = ring.slot_program(s)
            st = prog.init(entries[s].input, entries[s].coins(seed))
            self.programs[s] = prog
            self.states[s] = st
            if prog.finished(st) is not None:
                self.done[s] = True
                self.halt_rounds[s] = 0
            else:
                self.done[s] = False

    def step(self, round_no: int, fed: Sequence[tuple[int, int, bytes]]) -> list[tuple[int, int, bytes]]:
        for vslot, from_slot, payload in fed:
            self.pending.setdefault(vslot, {})[from_slot] = payload
        if self.round_cap is not None and round_no > self.round_cap:
            self.truncated = True
            self.pending = {}
            return []
        boundary: list[tuple[int, int, bytes]] = []
        next_pending: dict[int, dict[int, bytes]] = {}
        for s, prog in self.programs.items():
            if self.done[s]:
                continue
            st, outbox = prog.step(self.states[s], round_no, self.pending.get(s, {}))
            self.states[s] = st
            if prog.finished(st) is not None:
                self.done[s] = True
                self.halt_rounds[s] = round_no
            for dst, payload in outbox.items():
                if dst in self.external:
                    boundary.append((s, dst, payload))
                else:
                    next_pending.setdefault(dst, {})[s] = payload
        self.pending = next_pending
        return boundary


class NeighborEmbeddingAdversary(AdversaryStrategy):
    """Drops the two honest parties into slots (A_j, B_j) of a simulated ring.

    Corrupts party 2 and plays, toward each honest party, the neighboring
    virtual slot of a ring whose other 3m-2 slots it simulates internally.
    The honest pair's joint view is then exactly the view of two adjacent
    ring slots, which is what makes this family the right consistency probe.
    """

    def __init__(self, spec3: ProtocolSpec, m: int, j: int,
                 fixed_w: Optional[JointInput] = None,
                 fixed_seed: Optional[int] = None):
        if not 1 <= j <= m:
            raise ConfigError("copy index j out of range")
        self.spec3 = spec3
        self.m = m
        self.j = j
        self.ring = build_ring(spec3, m)
        self.corrupted = frozenset({2})
        e_a = self.ring.slot_of(0, j)
        e_b = self.ring.slot_of(1, j)
        self.external = {e_a: 0, e_b: 1}
        size = self.ring.size
        # each honest party's channel to corrupted party 2 bridges to one virtual slot
        self.in_bridge = {0: (e_a - 1) % size, 1: (e_b + 1) % size}
        self.fixed_w = fixed_w
        self.fixed_seed = fixed_seed

    def describe(self) -> str:
        return f"embed[j={self.j},m={self.m}]"

    def init(self, ctx: AdversaryContext):
        if self.fixed_w is not None:
            entries = {s: self.fixed_w[s] for s in range(self.ring.size) if s not in self.external}
            seed = self.fixed_seed if self.fixed_seed is not None else ctx.seed
        else:
            w = self.ring.sample_w(derive_seed(ctx.seed, "embed-w", self.j), label_prefix=b"emb")
            entries = {s: w[s] for s in range(self.ring.size) if s not in self.external}
            seed = derive_seed(ctx.seed, "embed-run", self.j)
        return VirtualRing(self.ring, entries, seed, dict(self.external))

    def step(self, vring: VirtualRing, round_no: int, inbound):
        fed = []
        for (src, dst), payload in inbound.items():
            slot = self.ring.slot_of(src, self.j)  # src is 0 or 1, its role == its id
            fed.append((self.in_bridge[src], slot, payload))
        boundary = vring.step(round_no, fed)
        out = {}
        for vslot, ext_slot, payload in boundary:
            out[(2, self.external[ext_slot])] = payload
        return vring, out


def neighbor_embedding_adversary(spec3: ProtocolSpec, m: int, j: int,
                                 fixed_w: Optional[JointInput] = None,
                                 fixed_seed: Optional[int] = None) -> NeighborEmbeddingAdversary:
    return NeighborEmbeddingAdversary(spec3, m, j, fixed_w, fixed_seed)


def embedding_family(spec3: ProtocolSpec, m: int) -> list[NeighborEmbeddingAdversary]:
    """The j-indexed family the consistency estimate runs against."""
    return [NeighborEmbeddingAdversary(spec3, m, j) for j in range(1, m + 1)]


class AttackAdversary(AdversaryStrategy):
    """Online phase of the ring attack: bridge the honest parties into the
    pre-committed ring and announce the far slot's output before round 1.

    The honest parties land on the window slots matching the corrupted set;
    every remaining slot replays its phase-1 program with the phase-1 coins,
    so the far slot P* is guaranteed to behave exactly as it did offline as
    long as honest influence cannot reach it in time (it sits farther than
    the round budget allows).
    """

    def __init__(self, spec3: ProtocolSpec, phase1: AttackPhase1Result,
                 corrupted: frozenset[int], virtual_round_cap: Optional[int] = None):
        if phase1.aborted:
            raise ConfigError("phase 1 aborted; no value to force")
        self.spec3 = spec3
        self.phase1 = phase1
        self.corrupted = frozenset(corrupted)
        self.ring = phase1.ring or build_ring(spec3, phase1.m)
        self.mapping = honest_slot_map(self.corrupted)  # honest party -> slot
        self.external = {slot: h for h, slot in self.mapping.items()}
        if virtual_round_cap is None and phase1.variant == "expected":
            virtual_round_cap = 64 * max(1, phase1.q)
        self.virtual_round_cap = virtual_round_cap
        size = self.ring.size
        self.in_bridge: dict[tuple[int, int], int] = {}
        for slot, h in self.external.items():
            for v in ((slot - 1) % size, (slot + 1) % size):
                if v in self.external:
                    continue
                role = v % 3
                if role not in self.corrupted:
                    raise ConfigError("honest window mapping broke role alignment")
                self.in_bridge[(h, role)] = v

    def describe(self) -> str:
        return f"ring-attack[corrupt={sorted(self.corrupted)},m={self.phase1.m}]"

    def init(self, ctx: AdversaryContext):
        entries = {
            s: self.phase1.w[s]
            for s in range(self.ring.size) if s not in self.external
        }
        return VirtualRing(self.ring, entries, self.phase1.seed, dict(self.external),
                           round_cap=self.virtual_round_cap)

    def pre_announce(self, vring) -> Optional[bytes]:
        return self.phase1.y_star

    def step(self, vring: VirtualRing, round_no: int, inbound):
        fed = []
        for (src, dst), payload in inbound.items():
            vslot = self.in_bridge.get((src, dst))
            if vslot is None:
                continue  # traffic between corrupted parties; nothing to simulate
            fed.append((vslot, self.mapping[src], payload))
        boundary = vring.step(round_no, fed)
        out = {}
        for vslot, ext_slot, payload in boundary:
            out[(vslot % 3, self.external[ext_slot])] = payload
        return vring, out


def attack_adversary(spec3: ProtocolSpec, phase1: AttackPhase1Result,
                     corrupted: frozenset[int]) -> AttackAdversary:
    return AttackAdversary(spec3, phase1, corrupted)


def _bundle(triples: Sequence[tuple[int, int, bytes]]) -> bytes:
    rows = sorted([s, d, p.hex()] for s, d, p in triples)
    return json.dumps(rows, separators=(",", ":")).encode()


def _unbundle(data: bytes) -> list[tuple[int, int, bytes]]:
    return [(s, d, bytes.fromhex(h)) for s, d, h in json.loads(data.decode())]


@dataclass(frozen=True)
class Partition:
    """Three-way split of n parties: two benign groups and the corrupted set."""

    n: int
    t: int
    groups: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    @property
    def corrupted(self) -> tuple[int, ...]:
        return self.groups[2]


def partition_to_three(n: int, t: int, corrupted: Sequence[int]) -> Partition:
    """Deterministic partition (B1, B2, I) used by the n-party reduction.

    Honest-majority regime (n/3 <= t < n/2): |B1| = |B2| = t and |I| = n-2t.
    Dishonest-majority regime (t >= n/2): sizes (ceil((n-1)/2), floor((n-1)/2), 1).
    B1 takes the smallest non-corrupted indices, B2 the rest.
    """
    corrupt = tuple(sorted(set(corrupted)))
    if any(i < 0 or i >= n for i in corrupt):
        raise ConfigError("corrupted indices out of range")
    if 2 * t >= n:
        want = 1
        size1 = (n - 1 + 1) // 2  # ceil((n-1)/2)
    elif 3 * t >= n:
        want = n - 2 * t
        size1 = t
    else:
        raise ConfigError("corruption threshold below n/3 is out of scope")
    if len(corrupt) != want:
        raise ConfigError(f"this regime needs exactly {want} corrupted parties, got {len(corrupt)}")
    rest = [i for i in range(n) if i not in corrupt]
    b1 = tuple(rest[:size1])
    b2 = tuple(rest[size1:])
    return Partition(n=n, t=t, groups=(b1, b2, corrupt))


class FusedProgram(PartyProgram):
    """One super-party simulating a whole partition group in lockstep.

    Messages inside the group are buffered for the members' next round;
    messages between groups ride the three fused channels as sorted bundles
    of (original sender, original receiver, payload). The fused party halts
    when all members have halted and outputs the lowest-index member's
    Outcome, so round complexity is preserved exactly.
    """

    def __init__(self, spec: ProtocolSpec, partition: Partition, gid: int):
        self.spec = spec
        self.partition = partition
        self.gid = gid
        self.members = partition.groups[gid]
        self.group_of = {p: g for g, grp in enumerate(partition.groups) for p in grp}
        self.role_id = f"fused{gid}({','.join(map(str, self.members))})"

    def init(self, input_bytes, coins):
        states = []
        pos = 0
        for p in self.members:
            ln = self.spec.domains[p].length
            member_input = input_bytes[pos:pos + ln]
            pos += ln
            states.append((p, self.spec.programs[p].init(member_input, coins.sublabel(b"m%d" % p))))
        return (tuple(states), ())

    def step(self, state, round_no, inbox):
        member_states = dict(state[0])
        boxes: dict[int, dict[int, bytes]] = {p: {} for p in self.members}
        for src, dst, payload in state[1]:
            boxes[dst][src] = payload
        for packed in inbox.values():
            for src, dst, payload in _unbundle(packed):
                if dst in boxes:
                    boxes[dst][src] = payload
        internal_next: list[tuple[int, int, bytes]] = []
        outward: dict[int, list[tuple[int, int, bytes]]] = {}
        new_states = []
        for p in self.members:
            prog = self.spec.programs[p]
            st = member_states[p]
            if prog.finished(st) is not None:
                new_states.append((p, st))
                continue
            st, outbox = prog.step(st, round_no, boxes[p])
            new_states.append((p, st))
            for dst, payload in outbox.items():
                g = self.group_of[dst]
                if g == self.gid:
                    internal_next.append((p, dst, payload))
                else:
                    outward.setdefault(g, []).append((p, dst, payload))
        sends = {g: _bundle(triples) for g, triples in outward.items()}
        return (tuple(new_states), tuple(sorted(internal_next))), sends

    def finished(self, state):
        outs = []
        for p, st in state[0]:
            o = self.spec.programs[p].finished(st)
            if o is None:
                return None
            outs.append((p, o))
        return min(outs)[1]


def fuse_parties(spec: ProtocolSpec, partition: Partition) -> ProtocolSpec:
    """3-party protocol whose parties are the partition groups of `spec`."""
    if partition.n != spec.n:
        raise ConfigError("partition size does not match protocol")
    programs = tuple(FusedProgram(spec, partition, g) for g in range(3))
    domains = tuple(
        FusedInput(tuple(spec.domains[p] for p in partition.groups[g]))
        for g in range(3)
    )
    return ProtocolSpec(
        name=f"fused({spec.name};{partition.groups})",
        programs=programs,
        round_bound=spec.round_bound,
        domains=domains,
    )


class UnfusedAttackAdversary(AdversaryStrategy):
    """n-party face of the fused 3-party ring attack.

    Bundles the real honest parties' traffic the way their fused super-party
    would, runs the 3-party attack adversary on the bundles, and unpacks its
    replies onto the real point-to-point edges.
    """

    def __init__(self, spec: ProtocolSpec, partition: Partition, inner: AttackAdversary):
        self.spec = spec
        self.partition = partition
        self.inner = inner
        self.corrupted = frozenset(partition.corrupted)
        self.group_of = {p: g for g, grp in enumerate(partition.groups) for p in grp}

    def describe(self) -> str:
        return f"nparty-attack[I={sorted(self.corrupted)}]"

    def init(self, ctx: AdversaryContext):
        return self.inner.init(AdversaryContext(ctx.aux, {}, ctx.seed, 3))

    def pre_announce(self, state) -> Optional[bytes]:
        return self.inner.pre_announce(state)

    def step(self, state, round_no, inbound):
        buckets: dict[int, list[tuple[int, int, bytes]]] = {}
        for (src, dst), payload in inbound.items():
            g = self.group_of[src]
            if g == 2:
                continue  # corrupted chatter to itself
            buckets.setdefault(g, []).append((src, dst, payload))
        fused_in = {(g, 2): _bundle(triples) for g, triples in buckets.items()}
        state, fused_out = self.inner.step(state, round_no, fused_in)
        out = {}
        for (fsrc, fdst), packed in fused_out.items():
            for src, dst, payload in _unbundle(packed):
                out[(src, dst)] = payload
        return state, out

    def final_output(self, state) -> bytes:
        return self.inner.final_output(state)


@dataclass
class NPartyAttack:
    """Everything attack_n_party prepared: partition, fused pieces, adversary."""

    spec: ProtocolSpec
    partition: Partition
    fused_spec: ProtocolSpec
    phase1: AttackPhase1Result
    adversary: Optional[UnfusedAttackAdversary]

    @property
    def y_star(self) -> Optional[bytes]:
        return self.phase1.y_star


def attack_n_party(spec: ProtocolSpec, t: int, corrupted: Sequence[int], seed: int, *,
                   variant: str = "strict", q_expected: Optional[int] = None,
                   z: int = 16) -> NPartyAttack:
    """Build the full n-party attack: partition, fuse, phase 1, bridge."""
    partition = partition_to_three(spec.n, t, corrupted)
    fused = fuse_parties(spec, partition)
    if variant == "strict":
        if not spec.round_bound.strict:
            raise ConfigError("strict attack needs a strict-round protocol")
        phase1 = phase1_strict(fused, seed)
    elif variant == "expected":
        if q_expected is None:
            q_expected = spec.q
        phase1 = phase1_expected(fused, q_expected, z, seed)
        if phase1.aborted:
            return NPartyAttack(spec, partition, fused, phase1, None)
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    inner = AttackAdversary(fused, phase1, frozenset({2}))
    return NPartyAttack(spec, partition, fused, phase1,
                        UnfusedAttackAdversary(spec, partition, inner))

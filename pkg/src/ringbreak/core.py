"""Core protocol model: party programs, coin streams, joint inputs.

Parties are deterministic state machines driven by a lockstep round engine
(see netsim). All randomness a party ever uses comes from its CoinStream,
which is a pure function of (master_seed, label), so any execution can be
replayed bit-for-bit from its seed and input vector.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

MASK64 = 0xFFFFFFFFFFFFFFFF


class SpecViolation(Exception):
    """A program broke its declared contract (round bound, halt absorption...)."""


class TopologyViolation(Exception):
    """A message was emitted on an edge that does not exist."""


class ConfigError(Exception):
    """Bad user-supplied configuration or input file."""


class _Sentinel:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __reduce__(self):
        # keep identity across pickling (process pools compare by "is")
        return (_sentinel_lookup, (self._name,))


BOT = _Sentinel("BOT")          # the distinguished abort output
RUNNING = _Sentinel("RUNNING")  # party still active when the run was cut off

_SENTINELS = {"BOT": BOT, "RUNNING": RUNNING}


def _sentinel_lookup(name: str) -> _Sentinel:
    return _SENTINELS[name]


# Outcome of a party: a byte-string, or BOT. RUNNING is a status, not an Outcome.
Outcome = Any


def outcome_repr(value: Any) -> str:
    """Stable printable form used in histograms and reports."""
    if value is BOT:
        return "BOT"
    if value is RUNNING:
        return "RUNNING"
    if isinstance(value, bytes):
        return value.hex()
    return repr(value)


def derive_seed(master_seed: int, *parts: Any) -> int:
    """Stable 64-bit seed for a sub-experiment (trial, iteration, pilot...).

    Pure function of the master seed and the part labels; no global state.
    """
    h = hashlib.sha256()
    h.update(b"ringbreak-seed")
    h.update(struct.pack("<Q", master_seed & MASK64))
    for p in parts:
        data = p if isinstance(p, bytes) else str(p).encode()
        h.update(struct.pack("<I", len(data)))
        h.update(data)
    return struct.unpack("<Q", h.digest()[:8])[0]


class CoinStream:
    """Deterministic random byte stream, positionally addressable.

    Bytes are produced in 32-byte blocks via SHA-256 in counter mode over
    (master_seed, label, block_index). Distinct labels give computationally
    unrelated streams under the same seed. Reads are stateless: callers that
    need a cursor keep the offset in their own state, which keeps party
    `step` functions pure.
    """

    __slots__ = ("seed", "label", "_prefix", "_blocks")

    def __init__(self, seed: int, label: bytes):
        if not isinstance(label, bytes):
            raise TypeError("coin label must be bytes")
        self.seed = seed & MASK64
        self.label = label
        self._prefix = (
            b"ringbreak-coins"
            + struct.pack("<Q", self.seed)
            + struct.pack("<I", len(label))
            + label
        )
        self._blocks: dict[int, bytes] = {}

    def _block(self, idx: int) -> bytes:
        blk = self._blocks.get(idx)
        if blk is None:
            blk = hashlib.sha256(self._prefix + struct.pack("<Q", idx)).digest()
            self._blocks[idx] = blk
        return blk

    def read(self, offset: int, n: int) -> bytes:
        if offset < 0 or n < 0:
            raise ValueError("negative coin read")
        out = bytearray()
        idx, within = divmod(offset, 32)
        while len(out) < n:
            out += self._block(idx)[within:]
            within = 0
            idx += 1
        return bytes(out[:n])

    def byte(self, i: int) -> int:
        return self._block(i // 32)[i % 32]

    def bit(self, i: int) -> int:
        return (self.byte(i // 8) >> (i % 8)) & 1

    def u64(self, offset: int) -> int:
        return struct.unpack("<Q", self.read(offset, 8))[0]

    def uniform(self, offset: int) -> float:
        """Dyadic uniform in [0, 1) from 8 bytes at `offset`."""
        return self.u64(offset) / 2.0**64

    def sublabel(self, extra: bytes) -> "CoinStream":
        """Independent stream derived under the same seed (used by fused parties)."""
        return CoinStream(self.seed, self.label + b"/" + extra)

    def __repr__(self) -> str:
        return f"CoinStream(seed={self.seed:#x}, label={self.label!r})"


def derive_coins(master_seed: int, label: bytes) -> CoinStream:
    """The one blessed way to mint a party's coin stream."""
    return CoinStream(master_seed, label)


class PartyProgram:
    """Deterministic per-party state machine.

    Lifecycle per execution: init once, then one `step` call per round.
    The inbox passed to the round-r call holds the messages delivered at
    the end of round r-1 (empty for r=1), keyed by sender index. The
    returned outbox maps receiver index -> payload for round r. State must
    be treated as immutable: step returns a new value and must not mutate
    its argument (the engine may replay steps).

    Contract for honest programs: once finished(state) returns an Outcome,
    every later step returns the same state with an empty outbox, and the
    Outcome never changes.
    """

    role_id: str = "?"

    def init(self, input_bytes: bytes, coins: CoinStream) -> Any:
        raise NotImplementedError

    def step(self, state: Any, round_no: int, inbox: dict[int, bytes]) -> tuple[Any, dict[int, bytes]]:
        raise NotImplementedError

    def finished(self, state: Any) -> Optional[Outcome]:
        raise NotImplementedError


@dataclass(frozen=True)
class RoundBound:
    """Declared round complexity: strict q-round, or expected q rounds."""

    kind: str  # "strict" | "expected"
    q: int

    def __post_init__(self):
        if self.kind not in ("strict", "expected"):
            raise ValueError(f"unknown round bound kind {self.kind!r}")
        if self.q < 1:
            raise ValueError("round bound must be >= 1")

    @property
    def strict(self) -> bool:
        return self.kind == "strict"


class InputDomain:
    """Declared per-party input domain; knows its byte length and sampling."""

    length: int

    def zero(self) -> bytes:
        return bytes(self.length)

    def sample(self, coins: CoinStream, offset: int = 0) -> bytes:
        raise NotImplementedError


@dataclass(frozen=True)
class BitInput(InputDomain):
    """A single bit, carried in the low bit of byte 0; remaining bytes are padding."""

    length: int = 1

    def sample(self, coins: CoinStream, offset: int = 0) -> bytes:
        return bytes([coins.byte(offset) & 1]) + bytes(self.length - 1)


@dataclass(frozen=True)
class RawInput(InputDomain):
    """Uniform byte-strings of the declared length."""

    length: int

    def sample(self, coins: CoinStream, offset: int = 0) -> bytes:
        return coins.read(offset, self.length)


@dataclass(frozen=True)
class FusedInput(InputDomain):
    """Concatenation of member domains (inputs of a fused party)."""

    members: tuple[InputDomain, ...]

    @property
    def length(self) -> int:  # type: ignore[override]
        return sum(m.length for m in self.members)

    def sample(self, coins: CoinStream, offset: int = 0) -> bytes:
        out = bytearray()
        pos = offset
        for m in self.members:
            out += m.sample(coins, pos)
            pos += 64  # fixed stride so member samples never overlap
        return bytes(out)


@dataclass(frozen=True)
class ProtocolSpec:
    """A complete n-party protocol: programs, round bound, input domains."""

    name: str
    programs: tuple[PartyProgram, ...]
    round_bound: RoundBound
    domains: tuple[InputDomain, ...]

    def __post_init__(self):
        if len(self.programs) < 2:
            raise ValueError("need at least 2 parties")
        if len(self.domains) != len(self.programs):
            raise ValueError("one input domain per party")

    @property
    def n(self) -> int:
        return len(self.programs)

    @property
    def q(self) -> int:
        return self.round_bound.q


@dataclass(frozen=True)
class JointEntry:
    """One party's fixed execution inputs: input bytes plus a coin label.

    Together with a master seed this pins the party's entire behavior;
    serialized length is input length + the coin budget of the run.
    """

    input: bytes
    coin_label: bytes

    def coins(self, master_seed: int) -> CoinStream:
        return derive_coins(master_seed, self.coin_label)


@dataclass(frozen=True)
class JointInput:
    """Per-party JointEntry vector for one execution."""

    entries: tuple[JointEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> JointEntry:
        return self.entries[i]

    def validate(self, spec: ProtocolSpec) -> None:
        if len(self.entries) != spec.n:
            raise ValueError(f"expected {spec.n} entries, got {len(self.entries)}")
        for i, e in enumerate(self.entries):
            want = spec.domains[i].length
            if len(e.input) != want:
                raise ValueError(f"party {i}: input length {len(e.input)} != declared {want}")

    @staticmethod
    def zeros(spec: ProtocolSpec, label_prefix: bytes = b"p") -> "JointInput":
        return JointInput(tuple(
            JointEntry(spec.domains[i].zero(), label_prefix + b"/%d" % i)
            for i in range(spec.n)
        ))

    @staticmethod
    def sample(spec: ProtocolSpec, seed: int, label_prefix: bytes = b"p") -> "JointInput":
        """Inputs uniform over each party's declared domain; labels fixed."""
        src = derive_coins(seed, b"input-sample")
        entries = []
        for i in range(spec.n):
            entries.append(JointEntry(
                spec.domains[i].sample(src, offset=128 * i),
                label_prefix + b"/%d" % i,
            ))
        return JointInput(tuple(entries))


@dataclass
class ValidationReport:
    """Outcome of validate_spec: contract violations found over sampled runs."""

    spec_name: str
    trials: int
    violations: list[str] = field(default_factory=list)
    transcript_hash: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_spec(spec: ProtocolSpec, trials: int, seed: int) -> ValidationReport:
    """Probe a protocol against its declared contract.

    Checks, over `trials` honest runs with sampled inputs: the strict round
    bound (every party finished once round q's messages are consumed), halt
    absorption (no post-halt sends, no outcome drift), and replay determinism
    (same seed twice gives identical transcript and outcomes).
    """
    from . import netsim  # engine lives one layer up; import here to avoid a cycle

    report = ValidationReport(spec.name, trials)
    first_hash = None
    for trial in range(trials):
        tseed = derive_seed(seed, "validate", trial)
        joint = JointInput.sample(spec, tseed)
        # strict specs get 2 rounds of headroom past the declared bound so the
        # post-halt probe actually runs; laggards are caught via halt_rounds
        cap = (spec.q + 2) if spec.round_bound.strict else 64 * spec.q
        try:
            res = netsim.run_honest(
                spec, joint, tseed,
                max_rounds=cap,
                record=True, probe_halted=True, enforce_round_bound=False,
            )
        except SpecViolation as e:
            report.violations.append(f"trial {trial}: {e}")
            continue
        report.violations.extend(f"trial {trial}: {v}" for v in res.probe_violations)
        if spec.round_bound.strict:
            for i, out in enumerate(res.outcomes):
                # round q's messages are consumed by step call q+1
                if out is RUNNING or res.halt_rounds[i] > spec.q + 1:
                    report.violations.append(
                        f"trial {trial}: party {i} unfinished at declared round bound {spec.q}"
                    )
        if trial == 0:
            h1 = netsim.result_fingerprint(res)
            res2 = netsim.run_honest(
                spec, joint, tseed,
                max_rounds=cap,
                record=True, probe_halted=True, enforce_round_bound=False,
            )
            h2 = netsim.result_fingerprint(res2)
            if h1 != h2:
                report.violations.append("trial 0: nondeterministic replay (transcript mismatch)")
            first_hash = h1
    report.transcript_hash = first_hash or ""
    return report

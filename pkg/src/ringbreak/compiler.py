"""Two-threshold ideal model and the full-security wrapper.

The lower bound says nothing survives the ring attack unless the adversary's
block can already force the output; this module is the matching upper bound.
A threshold oracle computes f but lets an adversary corrupting more than t1
parties force a unanimous BOT. The wrapper turns that into full security for
(n-2t)-dominated f: every party replaces BOT by the dominating value y*.
The simulator argument is replayed literally: a simulator facing the
no-abort full ideal reproduces the wrapper's output distribution exactly,
because an abort can only be triggered by a coalition big enough (|I| > t1,
so |I| >= n-2t) to force y* through its own inputs.

The threshold oracle is used as an ideal primitive; realizing it from
concrete protocols is out of scope here. Adversaries for this module are
declarative: a corrupted set plus probability-weighted decisions, with exact
Fraction weights so distributions can be compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Optional, Sequence

from .core import BOT, ConfigError, SpecViolation, derive_coins, derive_seed, outcome_repr
from .dominance import DominanceWitness, FunctionTable, Token, is_k_dominated, token_key


class UnsupportedSubcase(ConfigError):
    """Parameter range the wrapper deliberately does not cover."""


@dataclass(frozen=True)
class IdealDecision:
    """What the ideal adversary tells the oracle: substituted inputs or abort."""

    abort: bool = False
    inputs: tuple[tuple[int, Token], ...] = ()

    def __post_init__(self):
        if self.abort and self.inputs:
            raise ConfigError("an aborting decision carries no inputs")

    @staticmethod
    def make_abort() -> "IdealDecision":
        return IdealDecision(abort=True)

    @staticmethod
    def substitute(mapping: dict[int, Token]) -> "IdealDecision":
        return IdealDecision(inputs=tuple(sorted(mapping.items())))

    def inputs_dict(self) -> dict[int, Token]:
        return dict(self.inputs)

    def describe(self) -> str:
        if self.abort:
            return "ABORT"
        return "sub(" + ",".join(f"{i}={v!r}" for i, v in self.inputs) + ")"


@dataclass(frozen=True)
class IdealResult:
    outputs: tuple[Any, ...]    # one entry per party, all equal here
    y: Any
    x_used: tuple[int, ...]
    aborted: bool = False


def _sanitize(f: FunctionTable, i: int, value: Any, default: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        return default
    if not 0 <= value < f.domains[i]:
        return default
    return value


def full_ideal_exec(f: FunctionTable, honest_inputs: dict[int, int],
                    adv_inputs: dict[int, Any],
                    corrupted: Optional[Sequence[int]] = None,
                    defaults: Optional[Sequence[int]] = None) -> IdealResult:
    """Fully secure ideal computation: everyone learns f(x'), no abort.

    Corrupted parties' missing or out-of-domain values fall back to the
    per-party default; honest values must be in-domain.
    """
    corrupt = set(corrupted) if corrupted is not None else set(range(f.n)) - set(honest_inputs)
    if set(honest_inputs) | corrupt != set(range(f.n)):
        raise ConfigError("inputs must cover every party")
    if set(honest_inputs) & corrupt:
        raise ConfigError("party listed as both honest and corrupted")
    if not set(adv_inputs) <= corrupt:
        raise ConfigError("adversary substituted an input for an honest party")
    defs = list(defaults) if defaults is not None else [0] * f.n
    x = [0] * f.n
    for i, v in honest_inputs.items():
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < f.domains[i]:
            raise ConfigError(f"honest input {v!r} outside domain of party {i}")
        x[i] = v
    for i in corrupt:
        x[i] = _sanitize(f, i, adv_inputs.get(i), defs[i])
    y = f.value(x)
    return IdealResult(outputs=(y,) * f.n, y=y, x_used=tuple(x))


@dataclass(frozen=True)
class ThresholdIdealConfig:
    """Oracle parameters: abort allowed only above t1, tolerance up to t2."""

    f: FunctionTable
    t1: int
    t2: int
    defaults: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.f.n
        if not 0 <= self.t1 <= self.t2:
            raise ConfigError("need 0 <= t1 <= t2")
        if self.t1 + 2 * self.t2 >= n:
            raise ConfigError("need t1 + 2*t2 < n")
        if self.defaults == ():
            object.__setattr__(self, "defaults", (0,) * n)
        if len(self.defaults) != n:
            raise ConfigError("one default per party")


def threshold_ideal_exec(cfg: ThresholdIdealConfig, honest_inputs: dict[int, int],
                         decision: IdealDecision, corrupted: Sequence[int]) -> IdealResult:
    """One oracle call: abort (if the coalition is big enough) or compute f."""
    corrupt = sorted(set(corrupted))
    if len(corrupt) > cfg.t2:
        raise ConfigError(f"oracle tolerates at most t2={cfg.t2} corruptions")
    if decision.abort:
        if len(corrupt) <= cfg.t1:
            raise SpecViolation(
                f"abort needs more than t1={cfg.t1} corrupted parties, got {len(corrupt)}")
        return IdealResult(outputs=(BOT,) * cfg.f.n, y=BOT, x_used=(), aborted=True)
    return full_ideal_exec(cfg.f, honest_inputs, decision.inputs_dict(),
                           corrupted=corrupt, defaults=cfg.defaults)


@dataclass(frozen=True)
class HybridAdversary:
    """Declarative adversary: corrupted set plus weighted oracle decisions.

    Weights are exact Fractions summing to 1, so the induced distributions
    can be enumerated instead of sampled.
    """

    name: str
    corrupted: tuple[int, ...]
    branches: tuple[tuple[Fraction, IdealDecision], ...]

    def __post_init__(self):
        if not self.branches:
            raise ConfigError("adversary needs at least one branch")
        total = Fraction(0)
        for w, _ in self.branches:
            if w <= 0:
                raise ConfigError("branch weights must be positive")
            total += w
        if total != 1:
            raise ConfigError(f"branch weights sum to {total}, not 1")

    def draw(self, seed: int) -> tuple[int, IdealDecision]:
        """Sample a branch; exact threshold comparison on a 64-bit uniform."""
        u = Fraction(derive_coins(seed, b"hybrid-branch").u64(0), 2 ** 64)
        acc = Fraction(0)
        for idx, (w, decision) in enumerate(self.branches):
            acc += w
            if u < acc:
                return idx, decision
        return len(self.branches) - 1, self.branches[-1][1]


def never_abort_adversary(corrupted: Sequence[int], inputs: dict[int, Token],
                          name: str = "forward") -> HybridAdversary:
    return HybridAdversary(name, tuple(sorted(corrupted)),
                           ((Fraction(1), IdealDecision.substitute(inputs)),))


def always_abort_adversary(corrupted: Sequence[int], name: str = "abort") -> HybridAdversary:
    return HybridAdversary(name, tuple(sorted(corrupted)),
                           ((Fraction(1), IdealDecision.make_abort()),))


def coin_abort_adversary(corrupted: Sequence[int], p_abort: Fraction,
                         inputs: dict[int, Token], name: str = "coin-abort") -> HybridAdversary:
    if not 0 < p_abort < 1:
        raise ConfigError("abort probability must be strictly between 0 and 1")
    return HybridAdversary(name, tuple(sorted(corrupted)), (
        (p_abort, IdealDecision.make_abort()),
        (Fraction(1) - p_abort, IdealDecision.substitute(inputs)),
    ))


@dataclass(frozen=True)
class RunRecord:
    """Joint outcome of one wrapper (or simulated-ideal) execution."""

    honest_outputs: tuple[Any, ...]
    adv_output: str
    decision: IdealDecision
    branch: int

    def key(self) -> tuple:
        return (tuple(outcome_repr(o) for o in self.honest_outputs), self.adv_output)


def _adv_output(branch: int, decision: IdealDecision, view: Any) -> str:
    return f"b{branch}:{decision.describe()}->{outcome_repr(view)}"


@dataclass(frozen=True)
class WrappedProtocol:
    """The full-security wrapper around one threshold-oracle call.

    Each party submits its input to the oracle and outputs the oracle's
    answer, except that a BOT answer is replaced by the dominating value y*.
    """

    f: FunctionTable
    n: int
    t: int
    s: int
    t1: int
    t2: int
    y_star: Token
    witness: DominanceWitness = field(repr=False)
    cfg: ThresholdIdealConfig = field(repr=False)

    def run_decision(self, inputs: Sequence[int], adv_corrupted: Sequence[int],
                     decision: IdealDecision, branch: int = 0) -> RunRecord:
        corrupt = sorted(set(adv_corrupted))
        honest = {i: inputs[i] for i in range(self.n) if i not in corrupt}
        res = threshold_ideal_exec(self.cfg, honest, decision, corrupt)
        outs = tuple(
            self.y_star if res.outputs[i] is BOT else res.outputs[i]
            for i in range(self.n) if i not in corrupt
        )
        view = BOT if res.aborted else res.y
        return RunRecord(honest_outputs=outs, adv_output=_adv_output(branch, decision, view),
                         decision=decision, branch=branch)

    def run(self, inputs: Sequence[int], adversary: Optional[HybridAdversary],
            seed: int) -> RunRecord:
        if adversary is None:
            # all parties honest: forward everyone's real input
            honest = {i: inputs[i] for i in range(self.n)}
            res = threshold_ideal_exec(self.cfg, honest, IdealDecision.substitute({}), [])
            return RunRecord(tuple(res.outputs), _adv_output(0, IdealDecision.substitute({}), res.y),
                             IdealDecision.substitute({}), 0)
        if len(adversary.corrupted) > self.t2:
            raise ConfigError("adversary exceeds the oracle's corruption tolerance")
        branch, decision = adversary.draw(seed)
        return self.run_decision(inputs, adversary.corrupted, decision, branch)


def wrap_dominated(f: FunctionTable, n: int, t: int) -> WrappedProtocol:
    """Build the wrapper for an (n-2t)-dominated f with n/3 <= t < n/2."""
    if f.n != n:
        raise ConfigError(f"table arity {f.n} does not match n={n}")
    if not (3 * t >= n and 2 * t < n):
        raise ConfigError(f"need n/3 <= t < n/2; got n={n}, t={t}")
    s = n - 2 * t
    if s < 2:
        raise UnsupportedSubcase(
            "n-2t = 1 needs the cryptographic compilation path, not this wrapper")
    witness = is_k_dominated(f, s)
    if witness is None:
        raise ConfigError(f"{f.name} is not {s}-dominated; the wrapper does not apply")
    t1, t2 = n - 2 * t - 1, t
    cfg = ThresholdIdealConfig(f=f, t1=t1, t2=t2)
    assert t1 <= t2 and t1 + 2 * t2 < n
    return WrappedProtocol(f=f, n=n, t=t, s=s, t1=t1, t2=t2,
                           y_star=witness.y_star, witness=witness, cfg=cfg)


def forcing_inputs(wrapped: WrappedProtocol, corrupted: Sequence[int]) -> dict[int, int]:
    """Inputs for the s lowest corrupted indices that pin f to y*."""
    corrupt = sorted(set(corrupted))
    if len(corrupt) < wrapped.s:
        raise ConfigError("coalition too small to force the output")
    subset = tuple(corrupt[:wrapped.s])
    assignment, tok = wrapped.witness.per_subset[subset]
    assert tok == wrapped.y_star
    sub = {i: v for i, v in zip(subset, assignment)}
    for i in corrupt[wrapped.s:]:
        sub[i] = wrapped.cfg.defaults[i]
    return sub


def simulate_ideal(wrapped: WrappedProtocol, adversary: HybridAdversary,
                   inputs: Sequence[int], seed: int) -> RunRecord:
    """The simulator: same adversary, full ideal, identical joint outcome.

    Draws the adversary's decision against a mock oracle. A forwarded
    decision goes straight to the full ideal; an abort is replaced by the
    witness inputs that force y*, while the adversary is shown the BOT it
    expects. The coin derivation matches WrappedProtocol.run so the two
    sides can be coupled per-seed in tests.
    """
    branch, decision = adversary.draw(seed)
    return simulate_ideal_decision(wrapped, adversary, inputs, decision, branch)


def simulate_ideal_decision(wrapped: WrappedProtocol, adversary: HybridAdversary,
                            inputs: Sequence[int], decision: IdealDecision,
                            branch: int = 0) -> RunRecord:
    corrupt = sorted(set(adversary.corrupted))
    honest = {i: inputs[i] for i in range(wrapped.n) if i not in corrupt}
    if decision.abort:
        if len(corrupt) <= wrapped.t1:
            raise SpecViolation(
                f"abort needs more than t1={wrapped.t1} corrupted parties, got {len(corrupt)}")
        sub = forcing_inputs(wrapped, corrupt)
        res = full_ideal_exec(wrapped.f, honest, sub, corrupted=corrupt,
                              defaults=wrapped.cfg.defaults)
        assert res.y == wrapped.y_star
        view: Any = BOT  # what the mock oracle shows the adversary
    else:
        res = full_ideal_exec(wrapped.f, honest, decision.inputs_dict(),
                              corrupted=corrupt, defaults=wrapped.cfg.defaults)
        view = res.y
    outs = tuple(res.outputs[i] for i in range(wrapped.n) if i not in corrupt)
    return RunRecord(honest_outputs=outs, adv_output=_adv_output(branch, decision, view),
                     decision=decision, branch=branch)


def enumerate_decisions(wrapped: WrappedProtocol, corrupted: Sequence[int]) -> list[IdealDecision]:
    """Every decision open to a coalition: all substitutions, plus abort if legal."""
    corrupt = sorted(set(corrupted))
    decisions = []
    if len(corrupt) > wrapped.t1:
        decisions.append(IdealDecision.make_abort())
    doms = [range(wrapped.f.domains[i]) for i in corrupt]
    for values in product(*doms):
        decisions.append(IdealDecision.substitute(dict(zip(corrupt, values))))
    return decisions


@dataclass
class ComparisonReport:
    method: str                 # "exhaustive" | "monte-carlo"
    distance: float
    exact_zero: Optional[bool]  # exhaustive only
    trials: Optional[int]
    real_dist: dict
    ideal_dist: dict


def _dist_to_json(dist: dict) -> dict:
    return {repr(k): float(v) for k, v in sorted(dist.items(), key=lambda kv: repr(kv[0]))}


def compare_real_ideal(f: FunctionTable, n: int, t: int, adversary: HybridAdversary,
                       inputs: Sequence[int], *, exhaustive: bool = True,
                       trials: int = 100_000, seed: int = 0) -> ComparisonReport:
    """Statistical distance between wrapper and simulated-ideal joint outputs.

    Exhaustive mode walks the adversary's branches with exact Fraction
    weights; Monte-Carlo mode couples both sides on per-trial seeds.
    """
    wrapped = wrap_dominated(f, n, t)
    if exhaustive:
        real: dict = {}
        ideal: dict = {}
        for branch, (w, decision) in enumerate(adversary.branches):
            r = wrapped.run_decision(inputs, adversary.corrupted, decision, branch)
            real[r.key()] = real.get(r.key(), Fraction(0)) + w
            s = simulate_ideal_decision(wrapped, adversary, inputs, decision, branch)
            ideal[s.key()] = ideal.get(s.key(), Fraction(0)) + w
        support = set(real) | set(ideal)
        tv = sum(abs(real.get(k, Fraction(0)) - ideal.get(k, Fraction(0))) for k in support) / 2
        return ComparisonReport(method="exhaustive", distance=float(tv),
                                exact_zero=(tv == 0), trials=None,
                                real_dist=_dist_to_json(real), ideal_dist=_dist_to_json(ideal))
    real_counts: dict = {}
    ideal_counts: dict = {}
    for i in range(trials):
        tseed = derive_seed(seed, "compare", i)
        r = wrapped.run(inputs, adversary, tseed)
        real_counts[r.key()] = real_counts.get(r.key(), 0) + 1
        s = simulate_ideal(wrapped, adversary, inputs, derive_seed(seed, "compare-sim", i))
        ideal_counts[s.key()] = ideal_counts.get(s.key(), 0) + 1
    support = set(real_counts) | set(ideal_counts)
    tv = sum(abs(real_counts.get(k, 0) - ideal_counts.get(k, 0)) for k in support) / (2 * trials)
    return ComparisonReport(method="monte-carlo", distance=tv, exact_zero=None, trials=trials,
                            real_dist=_dist_to_json({k: v / trials for k, v in real_counts.items()}),
                            ideal_dist=_dist_to_json({k: v / trials for k, v in ideal_counts.items()}))

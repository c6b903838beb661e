"""Coin-flipping bias: measurement and the forcing attack.

A coin-flip protocol should hand every honest party the same near-uniform
bit. The ring attack turns any consistent protocol into a bias machine: run
the offline ring until the far slot outputs the value you want, then force
it online. The attacker excludes one value and repeats the offline phase
with fresh coins until the pre-committed output differs from it; with the
excluded value chosen to appear with probability at most 1/2, the attack
aborts with probability at most 2^-kappa.

Bias here is the statistical distance of the common honest output from a
uniform bit; runs where the honest parties disagree are tallied separately
and excluded from the distribution, the same conditioning the consistency
definition uses. Every bound reported is degraded by the measured
inconsistency rate delta of the protocol under the embedding family, so a
protocol that is not consistent to begin with yields an INCONCLUSIVE flag
rather than a vacuous claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .core import ConfigError, JointInput, ProtocolSpec, RUNNING, derive_seed
from .netsim import AdversaryStrategy, ConsistencyReport, estimate_consistency, run_honest, run_with_adversary
from .ring import (
    AttackAdversary,
    AttackPhase1Result,
    attack_n_party,
    attack_ring_size,
    embedding_family,
    phase1_strict,
)
from .stats import proportion_sigma, statistical_distance, wilson_interval

UNIFORM_BIT = {"0": 0.5, "1": 0.5, "other": 0.0}


def _bucket(outcome) -> str:
    if outcome == b"\x00":
        return "0"
    if outcome == b"\x01":
        return "1"
    return "other"  # BOT, longer strings, non-bit bytes


@dataclass
class BiasReport:
    """Empirical distribution of the common honest output and its distance
    from a uniform bit. Conservative CI envelope from per-bucket Wilson
    intervals: the low end pulls every bucket toward uniform, the high end
    pushes it away."""

    spec_name: str
    adversary: Optional[str]
    trials: int
    consistent: int
    inconsistent: int
    counts: dict[str, int]
    distribution: dict[str, float]
    distance: float
    distance_low: float
    distance_high: float
    bucket_ci: dict[str, tuple[float, float]]
    forced_value: Optional[str] = None  # hex of the pre-announced value, if any

    def to_json(self) -> dict:
        return {
            "spec": self.spec_name,
            "adversary": self.adversary,
            "trials": self.trials,
            "consistent": self.consistent,
            "inconsistent": self.inconsistent,
            "counts": dict(sorted(self.counts.items())),
            "distribution": {k: self.distribution[k] for k in sorted(self.distribution)},
            "distance": self.distance,
            "distance_ci": [self.distance_low, self.distance_high],
            "bucket_ci": {k: list(self.bucket_ci[k]) for k in sorted(self.bucket_ci)},
            "forced_value": self.forced_value,
        }


def _distance_envelope(counts: dict[str, int], total: int) -> tuple[float, float, dict]:
    ci = {b: wilson_interval(counts.get(b, 0), total) for b in ("0", "1", "other")}
    toward = {}
    away = {}
    for b in ("0", "1", "other"):
        lo, hi = ci[b]
        target = UNIFORM_BIT[b]
        toward[b] = min(max(target, lo), hi)   # closest admissible point to uniform
        p = counts.get(b, 0) / total
        away[b] = hi if abs(hi - target) >= abs(lo - target) else lo
    return statistical_distance(toward, UNIFORM_BIT), statistical_distance(away, UNIFORM_BIT), ci


def measure_bias(spec: ProtocolSpec, adversary: Optional[AdversaryStrategy],
                 trials: int, seed: int, *, forced_value: Optional[bytes] = None,
                 min_trials: int = 1000) -> BiasReport:
    """Empirical output distribution over consistent runs.

    Honest inputs are resampled per trial; coin-flip protocols ignore them,
    but the measurement stays meaningful for input-dependent outputs too.
    """
    if trials < min_trials:
        raise ConfigError(f"need at least {min_trials} trials")
    counts = {"0": 0, "1": 0, "other": 0}
    inconsistent = 0
    for i in range(trials):
        tseed = derive_seed(seed, "bias-measure", i)
        joint = JointInput.sample(spec, tseed)
        if adversary is None:
            res = run_honest(spec, joint, tseed)
        else:
            res = run_with_adversary(spec, adversary, joint, tseed)
        outs = res.honest_outcomes()
        if any(o is RUNNING for o in outs):
            inconsistent += 1
            continue
        first = outs[0]
        if any(o != first for o in outs[1:]):
            inconsistent += 1
            continue
        counts[_bucket(first)] += 1
    consistent = trials - inconsistent
    if consistent == 0:
        raise ConfigError("no consistent runs; nothing to measure")
    distribution = {b: c / consistent for b, c in counts.items()}
    lo, hi, ci = _distance_envelope(counts, consistent)
    return BiasReport(
        spec_name=spec.name,
        adversary=adversary.describe() if adversary is not None else None,
        trials=trials,
        consistent=consistent,
        inconsistent=inconsistent,
        counts=counts,
        distribution=distribution,
        distance=statistical_distance(distribution, UNIFORM_BIT),
        distance_low=lo,
        distance_high=hi,
        bucket_ci=ci,
        forced_value=forced_value.hex() if forced_value is not None else None,
    )


@dataclass
class BiasAttackResult:
    """Outcome of the repeated-phase-1 search for a non-excluded value."""

    aborted: bool
    attempts: int
    kappa: int
    excluded: bytes
    y_star: Optional[bytes]
    corrupted: tuple[int, ...]
    adversary: Optional[AdversaryStrategy] = field(repr=False, default=None)
    phase1: Optional[AttackPhase1Result] = field(repr=False, default=None)


def bias_attack(spec: ProtocolSpec, corrupted: tuple[int, ...], kappa: int, seed: int,
                *, exclude: bytes = b"\x00") -> BiasAttackResult:
    """Search for a forcing adversary whose pre-committed value is not
    `exclude`, redoing the offline ring phase with fresh seeds up to kappa
    times. Aborting is a result, not an error.
    """
    n = spec.n
    corrupt = tuple(sorted(set(corrupted)))
    want = math.ceil(n / 3)
    if len(corrupt) != want:
        raise ConfigError(f"bias attack corrupts exactly ceil(n/3)={want} parties")
    if kappa < 1:
        raise ConfigError("need kappa >= 1 attempts")
    last_phase1 = None
    for attempt in range(1, kappa + 1):
        aseed = derive_seed(seed, "bias-attack", attempt)
        if n == 3:
            phase1 = phase1_strict(spec, aseed)
            adv: AdversaryStrategy = AttackAdversary(spec, phase1, frozenset(corrupt))
        else:
            if (n - len(corrupt)) % 2 != 0:
                raise ConfigError(
                    f"no integral threshold pairs n={n} with a coalition of {len(corrupt)}")
            t = (n - len(corrupt)) // 2
            atk = attack_n_party(spec, t, corrupt, aseed)
            phase1, adv = atk.phase1, atk.adversary
        last_phase1 = phase1
        y = phase1.y_star
        if y not in (b"\x00", b"\x01"):
            raise ConfigError(
                f"{spec.name} produced non-bit value {y!r}; not a coin-flip protocol")
        if y != exclude:
            return BiasAttackResult(aborted=False, attempts=attempt, kappa=kappa,
                                    excluded=exclude, y_star=y, corrupted=corrupt,
                                    adversary=adv, phase1=phase1)
    return BiasAttackResult(aborted=True, attempts=kappa, kappa=kappa, excluded=exclude,
                            y_star=None, corrupted=corrupt, adversary=None,
                            phase1=last_phase1)


@dataclass
class BiasVerdict:
    """verify_no_nontrivial_bias output: measured forcing distance vs the
    consistency-degraded bound. A non-positive bound means the protocol is
    too inconsistent for the inequality to say anything: INCONCLUSIVE."""

    spec_name: str
    kappa: int
    m: int
    corrupted: tuple[int, ...]
    excluded: str               # hex
    pilot_counts: dict[str, int]
    delta_hat: float
    delta_ci: tuple[float, float]
    attack_aborted: bool
    attempts: int
    y_star: Optional[str]       # hex
    forced: Optional[BiasReport]
    distance: Optional[float]
    sigma3: Optional[float]
    bound: float
    holds: Optional[bool]
    inconclusive: bool
    consistency: ConsistencyReport = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "spec": self.spec_name,
            "kappa": self.kappa,
            "m": self.m,
            "corrupted": list(self.corrupted),
            "excluded": self.excluded,
            "pilot_counts": dict(sorted(self.pilot_counts.items())),
            "delta_hat": self.delta_hat,
            "delta_ci": list(self.delta_ci),
            "attack_aborted": self.attack_aborted,
            "attempts": self.attempts,
            "y_star": self.y_star,
            "forced": self.forced.to_json() if self.forced is not None else None,
            "distance": self.distance,
            "sigma3": self.sigma3,
            "bound": self.bound,
            "holds": self.holds,
            "inconclusive": self.inconclusive,
        }


def pilot_polarity(spec: ProtocolSpec, runs: int, seed: int) -> tuple[bytes, dict[str, int]]:
    """Estimate which value the offline phase favors; exclude the minority.

    Ties exclude 0, matching the convention that the attack forces a nonzero
    value when there is nothing to choose between.
    """
    counts = {"0": 0, "1": 0}
    for i in range(runs):
        p1 = phase1_strict(spec, derive_seed(seed, "pilot", i))
        y = p1.y_star
        if y not in (b"\x00", b"\x01"):
            raise ConfigError(f"{spec.name} is not bit-valued; saw {y!r}")
        counts[_bucket(y)] += 1
    excluded = b"\x00" if counts["0"] <= counts["1"] else b"\x01"
    return excluded, counts


def verify_no_nontrivial_bias(spec: ProtocolSpec, kappa: int, trials: int, seed: int, *,
                              corrupted: Optional[tuple[int, ...]] = None,
                              delta_trials: Optional[int] = None,
                              pilot_runs: int = 256) -> BiasVerdict:
    """Measure how far the forcing adversary pushes the coin from uniform.

    The asserted inequality is distance >= 1/2 - 2^-kappa - (3m/2+1)*delta
    - 3*sigma, with delta measured under the embedding family (the exact
    family the consistency argument consumes) and sigma the standard error
    of the forced-bucket frequency.
    """
    n = spec.n
    if corrupted is None:
        want = math.ceil(n / 3)
        corrupted = tuple(range(n - want, n))
    if n != 3:
        raise ConfigError("the bias verdict is implemented for 3-party protocols")
    if trials < 1000:
        raise ConfigError("need at least 1000 trials")
    m = attack_ring_size(spec.q, "strict")

    family = embedding_family(spec, m)
    if delta_trials is None:
        delta_trials = max(100, trials // (2 * len(family)))
    consistency = estimate_consistency(spec, family, delta_trials,
                                       derive_seed(seed, "bias-delta"))
    delta_hat = consistency.delta_hat

    excluded, pilot_counts = pilot_polarity(spec, pilot_runs, derive_seed(seed, "bias-pilot"))
    attack = bias_attack(spec, corrupted, kappa, derive_seed(seed, "bias-search"),
                         exclude=excluded)

    if attack.aborted:
        bound = 0.5 - 2.0 ** (-kappa) - (1.5 * m + 1) * delta_hat
        return BiasVerdict(
            spec_name=spec.name, kappa=kappa, m=m, corrupted=corrupted,
            excluded=excluded.hex(), pilot_counts=pilot_counts, delta_hat=delta_hat,
            delta_ci=(consistency.ci_low, consistency.ci_high),
            attack_aborted=True, attempts=attack.attempts, y_star=None, forced=None,
            distance=None, sigma3=None, bound=bound, holds=None, inconclusive=True,
            consistency=consistency,
        )

    try:
        forced = measure_bias(spec, attack.adversary, trials,
                              derive_seed(seed, "bias-forced"),
                              forced_value=attack.y_star)
    except ConfigError:
        # zero consistent runs: the adversary breaks agreement outright, the
        # conditional distribution is empty and the inequality says nothing
        bound = 0.5 - 2.0 ** (-kappa) - (1.5 * m + 1) * delta_hat
        return BiasVerdict(
            spec_name=spec.name, kappa=kappa, m=m, corrupted=corrupted,
            excluded=excluded.hex(), pilot_counts=pilot_counts, delta_hat=delta_hat,
            delta_ci=(consistency.ci_low, consistency.ci_high),
            attack_aborted=False, attempts=attack.attempts,
            y_star=attack.y_star.hex(), forced=None, distance=None, sigma3=None,
            bound=bound, holds=None, inconclusive=True, consistency=consistency,
        )
    forced_count = forced.counts[_bucket(attack.y_star)]
    sigma3 = 3 * proportion_sigma(forced_count, forced.consistent)
    bound = 0.5 - 2.0 ** (-kappa) - (1.5 * m + 1) * delta_hat - sigma3
    inconclusive = bound <= 0
    return BiasVerdict(
        spec_name=spec.name, kappa=kappa, m=m, corrupted=corrupted,
        excluded=excluded.hex(), pilot_counts=pilot_counts, delta_hat=delta_hat,
        delta_ci=(consistency.ci_low, consistency.ci_high),
        attack_aborted=False, attempts=attack.attempts, y_star=attack.y_star.hex(),
        forced=forced, distance=forced.distance, sigma3=sigma3, bound=bound,
        holds=forced.distance >= bound, inconclusive=inconclusive,
        consistency=consistency,
    )

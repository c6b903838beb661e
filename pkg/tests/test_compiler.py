"""Wrapper-around-threshold-oracle tests: legality, forcing, real-vs-ideal."""

from fractions import Fraction
from itertools import combinations

import pytest

from ringbreak.compiler import (
    HybridAdversary,
    IdealDecision,
    ThresholdIdealConfig,
    UnsupportedSubcase,
    always_abort_adversary,
    coin_abort_adversary,
    compare_real_ideal,
    enumerate_decisions,
    forcing_inputs,
    full_ideal_exec,
    never_abort_adversary,
    simulate_ideal_decision,
    threshold_ideal_exec,
    wrap_dominated,
)
from ringbreak.core import BOT, ConfigError, SpecViolation
from ringbreak.dominance import or_table, threshold_table, xor_table


class TestFullIdeal:
    def test_plain_computation(self):
        f = threshold_table(4, 2)
        res = full_ideal_exec(f, {0: 1, 1: 0, 2: 1, 3: 0}, {})
        assert res.y == 1 and res.outputs == (1, 1, 1, 1) and not res.aborted

    def test_adversary_defaults(self):
        f = or_table(3)
        # missing, boolean and out-of-domain substitutions all fall to the default
        for bad in ({}, {2: True}, {2: 7}, {2: "x"}):
            res = full_ideal_exec(f, {0: 0, 1: 0}, bad, corrupted=[2])
            assert res.y == 0 and res.x_used == (0, 0, 0)
        res = full_ideal_exec(f, {0: 0, 1: 0}, {2: 5}, corrupted=[2], defaults=[0, 0, 1])
        assert res.y == 1

    def test_honest_input_must_be_in_domain(self):
        f = or_table(3)
        with pytest.raises(ConfigError):
            full_ideal_exec(f, {0: 2, 1: 0}, {}, corrupted=[2])
        with pytest.raises(ConfigError):
            full_ideal_exec(f, {0: True, 1: 0}, {}, corrupted=[2])

    def test_party_cover_and_overlap(self):
        f = or_table(3)
        with pytest.raises(ConfigError):
            full_ideal_exec(f, {0: 0}, {}, corrupted=[2])  # party 1 unaccounted
        with pytest.raises(ConfigError):
            full_ideal_exec(f, {0: 0, 1: 0, 2: 0}, {}, corrupted=[2])
        with pytest.raises(ConfigError):
            full_ideal_exec(f, {0: 0, 1: 0}, {0: 1}, corrupted=[2])  # sub for honest


class TestThresholdIdeal:
    def cfg(self):
        return ThresholdIdealConfig(f=threshold_table(6, 2), t1=1, t2=2)

    def test_parameter_guards(self):
        f = threshold_table(6, 2)
        with pytest.raises(ConfigError):
            ThresholdIdealConfig(f=f, t1=2, t2=1)
        with pytest.raises(ConfigError):
            ThresholdIdealConfig(f=f, t1=2, t2=2)  # 2 + 4 >= 6
        with pytest.raises(ConfigError):
            ThresholdIdealConfig(f=f, t1=1, t2=2, defaults=(0, 0))

    def test_abort_needs_large_coalition(self):
        honest = {i: 0 for i in range(6) if i not in (4, 5)}
        res = threshold_ideal_exec(self.cfg(), honest, IdealDecision.make_abort(), [4, 5])
        assert res.aborted and all(o is BOT for o in res.outputs)
        with pytest.raises(SpecViolation):
            threshold_ideal_exec(self.cfg(), {i: 0 for i in range(5)},
                                 IdealDecision.make_abort(), [5])

    def test_tolerance_cap(self):
        honest = {i: 0 for i in range(3)}
        with pytest.raises(ConfigError):
            threshold_ideal_exec(self.cfg(), honest,
                                 IdealDecision.substitute({3: 0, 4: 0, 5: 0}), [3, 4, 5])

    def test_substitute_path_matches_full_ideal(self):
        honest = {0: 1, 1: 0, 2: 0, 3: 0}
        dec = IdealDecision.substitute({4: 1, 5: 0})
        res = threshold_ideal_exec(self.cfg(), honest, dec, [4, 5])
        ref = full_ideal_exec(threshold_table(6, 2), honest, {4: 1, 5: 0}, corrupted=[4, 5])
        assert res.y == ref.y == 1


class TestDecisionsAndAdversaries:
    def test_abort_carries_no_inputs(self):
        with pytest.raises(ConfigError):
            IdealDecision(abort=True, inputs=((0, 1),))
        assert IdealDecision.substitute({3: 1, 1: 0}).inputs_dict() == {1: 0, 3: 1}

    def test_weight_validation(self):
        with pytest.raises(ConfigError):
            HybridAdversary("empty", (0,), ())
        with pytest.raises(ConfigError):
            HybridAdversary("short", (0,), ((Fraction(1, 2), IdealDecision.make_abort()),))
        with pytest.raises(ConfigError):
            HybridAdversary("neg", (0,), (
                (Fraction(-1, 2), IdealDecision.make_abort()),
                (Fraction(3, 2), IdealDecision.substitute({})),
            ))
        with pytest.raises(ConfigError):
            coin_abort_adversary([0], Fraction(1), {})

    def test_draw_deterministic_and_calibrated(self):
        adv = coin_abort_adversary([4, 5], Fraction(1, 3), {4: 0, 5: 0})
        assert adv.draw(1234) == adv.draw(1234)
        aborts = sum(1 for s in range(3000) if adv.draw(s)[1].abort)
        assert 850 < aborts < 1150  # ~1000 expected


class TestWrapper:
    def test_parameter_arithmetic_sweep(self):
        for n in range(6, 13):
            for t in range((n + 2) // 3, (n - 1) // 2 + 1):
                if n - 2 * t < 2:
                    with pytest.raises(UnsupportedSubcase):
                        wrap_dominated(or_table(n), n, t)
                    continue
                w = wrap_dominated(or_table(n), n, t)
                assert w.s == n - 2 * t
                assert w.t1 == n - 2 * t - 1 and w.t2 == t
                assert w.t1 <= w.t2 and w.t1 + 2 * w.t2 < n
                assert w.y_star == 1

    def test_one_extra_honest_party_unsupported(self):
        with pytest.raises(UnsupportedSubcase):
            wrap_dominated(or_table(5), 5, 2)

    def test_out_of_band_t_rejected(self):
        with pytest.raises(ConfigError):
            wrap_dominated(or_table(9), 9, 2)   # t < n/3
        with pytest.raises(ConfigError):
            wrap_dominated(or_table(8), 8, 4)   # t >= n/2
        with pytest.raises(ConfigError):
            wrap_dominated(or_table(8), 9, 3)   # arity mismatch

    def test_undominated_table_rejected(self):
        with pytest.raises(ConfigError):
            wrap_dominated(xor_table(6), 6, 2)  # xor needs all 6, not 2

    def test_honest_run_has_no_substitutions(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        rec = w.run([1, 1, 0, 0, 0, 0], None, seed=3)
        assert rec.honest_outputs == (1,) * 6

    def test_adversary_over_tolerance(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        adv = never_abort_adversary([3, 4, 5], {})
        with pytest.raises(ConfigError):
            w.run([0] * 6, adv, seed=0)

    def test_abort_becomes_y_star(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        rec = w.run_decision([0] * 6, [4, 5], IdealDecision.make_abort())
        assert rec.honest_outputs == (1,) * 4
        assert "ABORT" in rec.adv_output

    def test_small_coalition_cannot_abort(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        with pytest.raises(SpecViolation):
            w.run_decision([0] * 6, [5], IdealDecision.make_abort())


class TestEnumerationAndSweep:
    def test_decision_counts(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        assert len(enumerate_decisions(w, [5])) == 2        # t1=1: no abort
        assert len(enumerate_decisions(w, [4, 5])) == 5     # 4 subs + abort

    def test_no_honest_bot_anywhere(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        inputs = [0, 1, 0, 1, 0, 1]
        for size in range(1, w.t2 + 1):
            for coalition in combinations(range(6), size):
                for dec in enumerate_decisions(w, coalition):
                    rec = w.run_decision(inputs, coalition, dec)
                    assert BOT not in rec.honest_outputs
                    if dec.abort:
                        assert set(rec.honest_outputs) == {w.y_star}


class TestForcingInputs:
    def test_forced_output_is_y_star(self):
        w = wrap_dominated(threshold_table(9, 3), 9, 3)
        for coalition in ((0, 1, 2), (2, 5, 8), (6, 7, 8)):
            sub = forcing_inputs(w, coalition)
            honest = {i: 0 for i in range(9) if i not in coalition}
            res = full_ideal_exec(w.f, honest, sub, corrupted=list(coalition))
            assert res.y == w.y_star

    def test_coalition_too_small(self):
        w = wrap_dominated(threshold_table(9, 3), 9, 3)
        with pytest.raises(ConfigError):
            forcing_inputs(w, (0, 1))


class TestRealVsIdeal:
    def test_exhaustive_distance_exactly_zero(self):
        f = threshold_table(6, 2)
        inputs = [0, 1, 0, 0, 0, 0]
        advs = [
            never_abort_adversary([4, 5], {4: 1, 5: 1}),
            always_abort_adversary([4, 5]),
            coin_abort_adversary([4, 5], Fraction(1, 2), {4: 0, 5: 0}),
        ]
        for adv in advs:
            rep = compare_real_ideal(f, 6, 2, adv, inputs, exhaustive=True)
            assert rep.method == "exhaustive"
            assert rep.exact_zero is True and rep.distance == 0.0

    def test_exhaustive_zero_across_coalitions_and_inputs(self):
        f = threshold_table(9, 3)
        for coalition in ((6, 7, 8), (0, 4, 8), (1, 2)):
            for inputs in ([0] * 9, [1] * 9, [0, 1] * 4 + [0]):
                sub = {i: 1 for i in coalition}
                adv = (coin_abort_adversary(coalition, Fraction(1, 3), sub)
                       if len(coalition) > 2 else never_abort_adversary(coalition, sub))
                rep = compare_real_ideal(f, 9, 3, adv, inputs, exhaustive=True)
                assert rep.exact_zero is True

    def test_monte_carlo_distance_small(self):
        f = threshold_table(6, 2)
        adv = coin_abort_adversary([4, 5], Fraction(1, 2), {4: 1, 5: 1})
        rep = compare_real_ideal(f, 6, 2, adv, [0, 1, 0, 1, 0, 0],
                                 exhaustive=False, trials=4000, seed=5)
        assert rep.method == "monte-carlo" and rep.trials == 4000
        assert rep.exact_zero is None
        assert rep.distance < 0.05

    def test_simulator_shows_bot_on_abort(self):
        w = wrap_dominated(threshold_table(6, 2), 6, 2)
        adv = always_abort_adversary([4, 5])
        rec = simulate_ideal_decision(w, adv, [0] * 6, IdealDecision.make_abort())
        # honest see the forced value, the adversary still sees an abort
        assert set(rec.honest_outputs) == {w.y_star}
        assert rec.adv_output.endswith("->BOT")

"""Dominance deciders against a from-scratch oracle and the known examples."""

import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from ringbreak.core import ConfigError
from ringbreak.dominance import (
    COMPUTABLE,
    CONDITIONAL,
    FunctionTable,
    NOT_COMPUTABLE,
    and_table,
    classify,
    constant_table,
    dominance_profile,
    forced_value,
    is_k_dominated,
    is_weakly_k_dominated,
    or_table,
    pair_and_or_table,
    table_from_fn,
    threshold_table,
    token_key,
    verify_weak_implies_strong,
    xor_table,
)


# ---------------------------------------------------------------- oracle
# Independent re-derivation, no shared helpers: iterate full input vectors
# instead of slicing, and scan subsets in a different order.

def oracle_forced(table, fixed):
    """fixed: dict pos->val. Returns the constant output if one exists."""
    seen = set()
    axes = [range(d) if i not in fixed else [fixed[i]] for i, d in enumerate(table.domains)]
    for x in itertools.product(*axes):
        seen.add(token_key(table.value(list(x))))
        if len(seen) > 1:
            return None
    val = table.value([axis[0] if i not in fixed else fixed[i]
                       for i, (axis, d) in enumerate(zip(axes, table.domains))])
    return val


def oracle_forcible_set(table, subset):
    out = set()
    for vals in itertools.product(*(range(table.domains[i]) for i in subset)):
        y = oracle_forced(table, dict(zip(subset, vals)))
        if y is not None:
            out.add(token_key(y))
    return out


def oracle_weak(table, k):
    return all(
        len(oracle_forcible_set(table, subset)) > 0
        for subset in itertools.combinations(range(table.n), k)
    )


def oracle_strong(table, k):
    common = None
    for subset in itertools.combinations(range(table.n), k):
        forcible = oracle_forcible_set(table, subset)
        common = forcible if common is None else common & forcible
        if not common:
            return False
    return bool(common)


def random_table(rng, n, max_dom=2):
    domains = [rng.randint(2, max_dom) for _ in range(n)]
    size = 1
    for d in domains:
        size *= d
    outputs = [rng.randint(0, 1) for _ in range(size)]
    return FunctionTable(n=n, domains=tuple(domains), outputs=tuple(outputs))


class TestFunctionTable:
    def test_index_and_value(self):
        f = table_from_fn(3, (2, 3, 2), lambda a, b, c: a * 100 + b * 10 + c)
        assert f.value([1, 2, 0]) == 120
        assert f.value([0, 0, 1]) == 1
        # first position most significant
        assert f.index((1, 0, 0)) == 6

    def test_validation(self):
        with pytest.raises(ConfigError):
            FunctionTable(n=2, domains=(2,), outputs=(0, 0))
        with pytest.raises(ConfigError):
            FunctionTable(n=2, domains=(2, 2), outputs=(0, 0, 0))
        with pytest.raises(ConfigError):
            FunctionTable(n=2, domains=(2, 0), outputs=())

    def test_json_roundtrip(self):
        f = pair_and_or_table()
        g = FunctionTable.from_json(f.to_json())
        assert g.n == f.n and g.domains == f.domains and g.outputs == f.outputs

    def test_from_json_rejects_garbage(self):
        with pytest.raises(ConfigError):
            FunctionTable.from_json("[1,2,3]")
        with pytest.raises(ConfigError):
            FunctionTable.from_json(json.dumps({"n": 2, "domains": [2, 2]}))
        with pytest.raises(ConfigError):
            FunctionTable.from_json(json.dumps(
                {"n": 2, "domains": [2, 2], "outputs": [0, 1, 2, [3]]}))

    def test_range_tokens_sorted(self):
        f = table_from_fn(2, (2, 2), lambda a, b: ["b", "a", "a", "c"][a * 2 + b])
        assert f.range_tokens() == ["a", "b", "c"]


class TestForcedValue:
    def test_or_forcing(self):
        f = or_table(3)
        assert forced_value(f, (0,), (1,)) == 1
        assert forced_value(f, (0,), (0,)) is None
        assert forced_value(f, (0, 1, 2), (0, 0, 0)) == 0

    def test_rejects_bad_positions(self):
        f = or_table(3)
        with pytest.raises(ConfigError):
            forced_value(f, (0, 0), (1, 1))
        with pytest.raises(ConfigError):
            forced_value(f, (5,), (1,))
        with pytest.raises(ConfigError):
            forced_value(f, (0,), (7,))

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle_random(self, seed):
        import random
        rng = random.Random(seed)
        f = random_table(rng, rng.randint(2, 4))
        k = rng.randint(1, f.n)
        subset = tuple(sorted(rng.sample(range(f.n), k)))
        vals = tuple(rng.randrange(f.domains[i]) for i in subset)
        assert forced_value(f, subset, vals) == oracle_forced(f, dict(zip(subset, vals)))


class TestDeciders:
    def test_or_is_1_dominated(self):
        w = is_k_dominated(or_table(3), 1)
        assert w is not None and w.y_star == 1

    def test_and_is_1_dominated_by_zero(self):
        w = is_k_dominated(and_table(3), 1)
        assert w is not None and w.y_star == 0

    def test_xor_only_full_control(self):
        f = xor_table(3)
        assert is_weakly_k_dominated(f, 2) is None
        assert is_k_dominated(f, 2) is None
        w = is_k_dominated(f, 3)
        assert w is not None and w.y_star == 0  # both forcible; smallest encoding wins

    def test_pairs_weak_but_not_strong_at_2(self):
        f = pair_and_or_table()
        weak = is_weakly_k_dominated(f, 2)
        assert weak is not None
        # different pairs force different values: {0,1} can force 1, {0,2} only 0
        assert weak.per_subset[(0, 1)][1] == 1
        assert weak.per_subset[(0, 2)][1] == 0
        assert is_k_dominated(f, 2) is None
        strong3 = is_k_dominated(f, 3)
        assert strong3 is not None

    def test_threshold_table_dominated_by_one(self):
        # any 3 of 9 parties can push a 3-of-9 threshold over the top
        w = is_k_dominated(threshold_table(9, 3), 3)
        assert w is not None and w.y_star == 1

    def test_witness_recheck_detects_tampering(self):
        w = is_k_dominated(or_table(3), 1)
        assert w.recheck(or_table(3))
        assert not w.recheck(and_table(3))

    def test_qualifying_lists_all(self):
        f = constant_table(3, 5)
        w = is_k_dominated(f, 1)
        assert w.y_star == 5 and w.qualifying == (5,)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_weak_matches_oracle(self, seed):
        import random
        rng = random.Random(seed)
        f = random_table(rng, rng.randint(2, 4))
        k = rng.randint(1, f.n)
        assert (is_weakly_k_dominated(f, k) is not None) == oracle_weak(f, k)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_strong_matches_oracle(self, seed):
        import random
        rng = random.Random(seed)
        f = random_table(rng, rng.randint(2, 4))
        k = rng.randint(1, f.n)
        assert (is_k_dominated(f, k) is not None) == oracle_strong(f, k)


class TestProfile:
    def test_profile_or3(self):
        p = dominance_profile(or_table(3))
        assert p.weak == (True, True, True)
        assert p.strong == (True, True, True)
        assert p.minimal_strong_k == 1

    def test_profile_xor3(self):
        p = dominance_profile(xor_table(3))
        assert p.weak == (False, False, True)
        assert p.strong == (False, False, True)
        assert p.minimal_strong_k == 3

    def test_profile_monotone_random(self):
        import random
        rng = random.Random(99)
        for _ in range(50):
            p = dominance_profile(random_table(rng, rng.randint(2, 5)))
            for k in range(p.n - 1):
                assert not (p.strong[k] and not p.strong[k + 1])
                assert not (p.weak[k] and not p.weak[k + 1])

    def test_budget_enforced(self):
        f = or_table(3)
        with pytest.raises(ConfigError):
            dominance_profile(f, budget=7)


class TestCollapse:
    def test_range_guard(self):
        with pytest.raises(ConfigError):
            verify_weak_implies_strong(or_table(3), 2)  # 3m > n

    def test_holds_on_examples(self):
        assert verify_weak_implies_strong(or_table(3), 1).holds
        assert verify_weak_implies_strong(xor_table(6), 2).holds
        v = verify_weak_implies_strong(threshold_table(9, 3), 3)
        assert v.holds and v.strongly_dominated and v.y_star == 1

    def test_holds_on_random_boolean_tables(self):
        import random
        rng = random.Random(7)
        for _ in range(300):
            n = rng.choice((6, 7))
            f = random_table(rng, n)
            v = verify_weak_implies_strong(f, 2)
            assert v.holds, v.counterexample


class TestClassify:
    def test_honest_majority_band(self):
        c = classify(or_table(9), 9, 3)   # k = 9-6 = 3
        assert c.verdict == COMPUTABLE and c.k == 3
        c = classify(xor_table(9), 9, 3)
        assert c.verdict == NOT_COMPUTABLE

    def test_dishonest_majority(self):
        c = classify(xor_table(4), 4, 2)
        assert c.verdict == NOT_COMPUTABLE and c.k == 1
        c = classify(or_table(4), 4, 2)
        assert c.verdict == CONDITIONAL and c.y_star == 1

    def test_out_of_scope_t(self):
        with pytest.raises(ConfigError):
            classify(or_table(9), 9, 2)  # t < n/3
        with pytest.raises(ConfigError):
            classify(or_table(9), 8, 3)  # arity mismatch

import numpy as np
import pytest

from chainbounds import AssumptionError, MarkovModel, validate
from conftest import (birth_death, no_selfloop_top, random_positive_model,
                      two_cycle)


def test_positive_matrix_all_hold():
    rng = np.random.default_rng(2)
    model = random_positive_model(rng, 3)
    report = validate(model)
    assert report.all_ok
    assert report.violations == ()


def test_missing_selfloop_breaks_block_assumption():
    report = validate(no_selfloop_top())
    assert not report.a1
    assert report.a2  # state -1 does transit to +1
    assert report.S_b == ("1",)
    bad = [v for v in report.violations if v.assumption == "A1"]
    assert len(bad) == 1
    assert bad[0].states == ("1",)
    assert "self-loop" in bad[0].witness


def test_birth_death_breaks_one_step_reach():
    report = validate(birth_death())
    assert report.a1  # argmax state -1 has a self-loop
    assert not report.a2
    bad = [v for v in report.violations if v.assumption == "A2"]
    assert len(bad) == 1
    assert bad[0].states == ("1",)


def test_negating_f_swaps_sides():
    rng = np.random.default_rng(8)
    for _ in range(10):
        model = random_positive_model(rng, 4)
        # knock out some transitions so the report is not trivially all-true
        P = model.P.copy()
        P[0, 1] = 0.0
        P[0] /= P[0].sum()
        model = MarkovModel(model.states, P, model.f, model.q)
        rep = validate(model)
        neg = validate(model.negated())
        assert (rep.a1, rep.a2) == (neg.a3, neg.a4)
        assert (rep.a3, rep.a4) == (neg.a1, neg.a2)
        assert rep.S_b == neg.S_a and rep.S_a == neg.S_b


def test_positive_rows_any_observable():
    rng = np.random.default_rng(9)
    for _ in range(10):
        model = random_positive_model(rng, int(rng.integers(2, 6)))
        assert validate(model).all_ok


def test_relabeling_invariance():
    rng = np.random.default_rng(10)
    model = birth_death()
    perm = rng.permutation(3)
    permuted = MarkovModel(
        tuple(model.states[i] for i in perm),
        model.P[np.ix_(perm, perm)],
        model.f[perm],
        model.q[perm],
    )
    rep, prep = validate(model), validate(permuted)
    assert (rep.a1, rep.a2, rep.a3, rep.a4) == (prep.a1, prep.a2, prep.a3, prep.a4)
    assert sorted(rep.S_b) == sorted(prep.S_b)
    assert sorted(rep.S_a) == sorted(prep.S_a)


def test_reducible_chain_is_an_error():
    model = MarkovModel(("a", "b"), [[1.0, 0.0], [0.5, 0.5]],
                        [0.0, 1.0], [0.5, 0.5])
    with pytest.raises(AssumptionError, match="not irreducible"):
        validate(model)


def test_two_cycle_fails_both_block_assumptions():
    report = validate(two_cycle())
    assert not report.a1 and not report.a3
    assert report.a2 and report.a4

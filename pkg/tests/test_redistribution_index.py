from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corridor_pension.redistribution_index import (
    Ledger,
    check_add,
    check_cont,
    check_fix,
    check_lin,
    check_mon,
    index_for_pool,
    update_monotone,
    update_proportional,
)


def reference_ledger() -> Ledger:
    # one pays 100, pot drops 25%, the other pays 80
    led = Ledger(mode="proportional")
    led.record(1, {1: F(100), 2: F(0)}, F(0))
    led.record(2, {1: F(0), 2: F(80)}, F(75))
    return led


def reference_monotone(a=F(0)) -> Ledger:
    led = Ledger(mode="monotone")
    led.record(1, {1: F(100), 2: F(0)}, F(0))
    led.record(2, {1: F(0), 2: F(80)}, a=a, c_pre=F(75))
    return led


def test_reference_pot_values_exact():
    led = reference_ledger()
    ev1, ev2 = led.events
    assert (ev1.c_pre, ev1.c_post) == (0, 100)
    assert (ev2.c_pre, ev2.c_post) == (75, 155)


def test_reference_shares_exact():
    led = reference_ledger()
    assert led.shares == {1: F(75, 155), 2: F(80, 155)}
    assert led.indices[1] == F(100)
    assert round(float(led.indices[2]), 2) == 106.67


def test_reference_monotonicity_failure():
    led = reference_ledger()
    res = check_mon(led)
    assert not res
    assert res.witness == (2, (1, 2))


def test_reference_passes_other_axioms():
    led = reference_ledger()
    assert check_cont(led)
    assert check_fix(led)
    assert check_lin(led)
    assert check_add(led, 0, 3, F(40))


def test_monotone_reference_passes_fairness_suite():
    led = reference_monotone()
    assert check_fix(led)
    assert check_mon(led)
    assert check_lin(led)
    assert check_add(led, 0, 3, F(40))
    # and the absolute-share identity is what it gives up
    assert not check_cont(led)


def test_monotone_interest_keeps_dominance():
    led = reference_monotone(a=F(1, 10))
    assert led.indices[1] == F(110)
    assert led.indices[2] == F(80)
    assert check_mon(led)


def test_proportional_dual_recursions_agree_floats():
    led = Ledger(mode="proportional")
    led.record(1.0, {"a": 100.0, "b": 50.0}, 0.0)
    led.record(2.0, {"a": 10.0, "b": 40.0}, 120.0)
    led.record(3.0, {"a": 0.0, "b": 5.0}, 200.0)
    assert sum(led.shares.values()) == pytest.approx(1.0, abs=1e-12)
    assert check_cont(led)


def test_first_event_rules():
    led = Ledger(mode="proportional")
    with pytest.raises(ValueError):
        led.record(1, {1: F(100)}, F(5))  # pot must start empty
    with pytest.raises(ValueError):
        led.record(1, {1: F(0)}, F(0))  # needs a positive contribution
    led.record(1, {1: F(100)}, F(0))
    with pytest.raises(ValueError):
        led.record(1, {1: F(10)}, F(90))  # strictly increasing times
    with pytest.raises(ValueError):
        led.record(2, {1: F(-5)}, F(90))


def test_proportional_undefined_on_wiped_pot():
    led = Ledger(mode="proportional")
    led.record(1, {1: F(100)}, F(0))
    with pytest.raises(ValueError, match="non-positive"):
        led.record(2, {2: F(10)}, F(0))


def test_mode_dispatch_guards():
    prop = Ledger(mode="proportional")
    with pytest.raises(ValueError):
        prop.record(1, {1: F(10)}, F(0), a=F(1, 10))
    mono = Ledger(mode="monotone")
    with pytest.raises(ValueError):
        update_proportional(mono, 1, {1: F(10)}, F(0))
    with pytest.raises(ValueError):
        update_monotone(prop, 1, {1: F(10)}, None, F(0))
    with pytest.raises(ValueError):
        Ledger(mode="other")


def test_monotone_negative_interest_rejected():
    led = Ledger(mode="monotone")
    led.record(1, {1: F(10)}, F(0))
    with pytest.raises(ValueError):
        led.record(2, {1: F(5)}, a=F(-1, 10), c_pre=F(9))


def test_zero_contribution_event_fixes_shares():
    led = Ledger(mode="proportional")
    led.record(1, {1: F(60), 2: F(40)}, F(0))
    before = led.shares
    led.record(2, {1: F(0), 2: F(0)}, F(80))  # pure revaluation
    assert led.shares == before
    assert check_fix(led)


def test_json_round_trip_preserves_exactness():
    led = reference_ledger()
    text = led.to_json()
    back = Ledger.from_json(text)
    assert back.mode == "proportional"
    # ids become strings in JSON; values stay exact rationals
    assert back.shares == {"1": F(75, 155), "2": F(80, 155)}
    assert isinstance(back.indices["2"], F)


def test_index_for_pool_lag():
    led = reference_ledger()
    assert index_for_pool(led, 1.5) == {1: F(1), 2: F(0)}
    # an event exactly at t is not yet visible
    assert index_for_pool(led, 2) == {1: F(1), 2: F(0)}
    assert index_for_pool(led, 3) == {1: F(75, 155), 2: F(80, 155)}
    with pytest.raises(ValueError):
        index_for_pool(led, 0)
    with pytest.raises(ValueError):
        index_for_pool(led, 0.5)


def test_check_add_guards():
    led = reference_ledger()
    with pytest.raises(ValueError):
        check_add(led, 5, 9, F(10))
    with pytest.raises(ValueError):
        check_add(led, 0, 1, F(10))  # not fresh
    with pytest.raises(ValueError):
        check_add(led, 0, 9, F(0))


_amounts = st.fractions(min_value=0, max_value=500, max_denominator=20)
_growth = st.fractions(min_value=F(1, 2), max_value=F(2), max_denominator=10)


@given(
    first=st.tuples(_amounts, _amounts),
    later=st.lists(st.tuples(_amounts, _amounts, _growth), min_size=1, max_size=4),
)
@settings(max_examples=150, deadline=None)
def test_proportional_invariants(first, later):
    a0, b0 = first
    if a0 + b0 == 0:
        a0 = F(1)
    led = Ledger(mode="proportional")
    led.record(0, {1: a0, 2: b0}, F(0))
    t = 0
    for ja, jb, g in later:
        t += 1
        c_pre = led.events[-1].c_post * g
        if c_pre <= 0 and ja + jb > 0:
            continue
        led.record(t, {1: ja, 2: jb}, c_pre)
    # exact normalization and contribution additivity hold by construction
    assert sum(led.shares.values()) == 1
    assert check_cont(led)
    assert check_lin(led)
    assert check_add(led, 0, 3, F(17))


@given(
    first=st.tuples(_amounts, _amounts),
    later=st.lists(
        st.tuples(_amounts, _amounts, st.fractions(min_value=0, max_value=1, max_denominator=10)),
        min_size=1,
        max_size=4,
    ),
)
@settings(max_examples=150, deadline=None)
def test_monotone_always_monotone(first, later):
    a0, b0 = first
    if a0 + b0 == 0:
        a0 = F(1)
    led = Ledger(mode="monotone")
    led.record(0, {1: a0, 2: b0}, F(0))
    t = 0
    for ja, jb, a in later:
        t += 1
        led.record(t, {1: ja, 2: jb}, a=a, c_pre=led.events[-1].c_post)
    assert sum(led.shares.values()) == 1
    assert check_mon(led)

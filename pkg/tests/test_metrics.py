from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cqsdc.metrics import (
    DONG,
    KAO,
    PROPOSED,
    IncompleteTranscript,
    ProtocolCost,
    ZeroDenominator,
    efficiency,
    measured_cost,
    table4_rows,
)
from cqsdc.protocol import ProtocolAborted, SessionConfig, run_session


def test_proposed_efficiency():
    e = efficiency(PROPOSED)
    assert (e.eta1, e.eta2) == (Fraction(2, 9), Fraction(1, 3))
    assert e.eta1_percent == Decimal("22.22") and e.eta2_percent == Decimal("33.33")


@pytest.mark.parametrize("cost", [DONG, KAO])
def test_baseline_efficiency(cost):
    e = efficiency(cost)
    assert e.eta1_percent == Decimal("12.5") and e.eta2_percent == Decimal("25")


def test_rounding_is_half_up():
    # 1/8 of a percent step: 0.125% -> 0.13
    assert efficiency(ProtocolCost(1, 800, 0)).eta1_percent == Decimal("0.13")


def test_zero_denominator():
    with pytest.raises(ZeroDenominator):
        efficiency(ProtocolCost(1, 0, 0))


@given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 50), st.integers(1, 20))
def test_scaling_leaves_efficiency_unchanged(m, q, b, k):
    c = ProtocolCost(m, q, b)
    assert efficiency(c) == efficiency(c.scaled(k))


def test_table4_rows_match():
    rows = table4_rows()
    assert [r["protocol"] for r in rows] == ["Dong et al.", "Kao et al.", "Proposed protocol"]
    assert all(r["matches"] for r in rows)


def test_measured_cost_from_transcript():
    t = run_session("011011", SessionConfig(n_message_groups=3))
    total, per = measured_cost(t)
    assert (per.m_u, per.q_k, per.b_k) == (2, 6, 3)
    assert (total.m_u, total.q_k, total.b_k) == (6, 18, 9)
    assert efficiency(total) == efficiency(PROPOSED)


def test_measured_cost_rejects_aborted():
    from cqsdc.adversary import AttackSpec

    for seed in range(20):
        try:
            run_session("00", SessionConfig(check_fraction=0.9, seed=seed), attack=AttackSpec.cnot(0, 1))
        except ProtocolAborted as e:
            with pytest.raises(IncompleteTranscript):
                measured_cost(e.transcript)
            return
    pytest.fail("no aborted session produced")


@given(st.integers(0, 50), st.integers(1, 50), st.integers(1, 50))
def test_eta2_at_least_eta1(m, q, b):
    e = efficiency(ProtocolCost(m, q, b))
    assert e.eta2 >= e.eta1


def test_measured_cost_over_random_sessions():
    rng = __import__("numpy").random.default_rng(99)
    for k in range(100):
        groups = int(rng.integers(1, 4))
        msg = "".join(rng.choice(["0", "1"], size=2 * groups))
        t = run_session(msg, SessionConfig(n_message_groups=groups, seed=k))
        per = measured_cost(t)[1]
        assert (per.m_u, per.q_k, per.b_k) == (2, 6, 3)

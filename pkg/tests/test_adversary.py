import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqsdc import qstate as qs
from cqsdc.adversary import (
    AttackSpec,
    InvalidSpec,
    aggregate_detection,
    apply_attack,
    attack_branches,
    detection_probability_exact,
    entangle_unitary,
    estimate_detection,
    published_claim,
    parse_unitary,
    posterior_over_secrets,
    random_unitary,
)
from cqsdc.channels import channel_state_p

R2 = math.sqrt(2)


def amplitudes(draw_seed):
    rng = np.random.default_rng(draw_seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


# intercept-resend, one target, exact oracle values
@pytest.mark.parametrize("eve,check,expect", [
    ("Z", "Z", 0.0), ("X", "X", 0.0), ("X", "Z", 0.5), ("Z", "X", 0.5),
    ("random", "Z", 0.25), ("random", "X", 0.25),
])
def test_intercept_exact(eve, check, expect):
    assert detection_probability_exact(AttackSpec.intercept_resend(eve), check) == pytest.approx(expect)


def test_intercept_on_two_sequences():
    spec = AttackSpec.intercept_resend("X", ("B", "C"))
    p = detection_probability_exact(spec, "Z")
    assert 0 < p <= 1
    assert detection_probability_exact(AttackSpec.intercept_resend("Z", ("B", "C")), "Z") == 0


def test_cnot_state_by_hand():
    # ancilla (a|0>+b|1>) controls a flip of qubit a
    a, b = 0.6, 0.8j
    got = apply_attack(channel_state_p(1), AttackSpec.cnot(a, b, ("A",)))
    labs = got.labels
    p = channel_state_p(1)
    flipped = qs.apply_1q(p, qs.X, "a1")
    anc = got.labels[-1]
    expect = a * np.kron(p.amplitudes, [1, 0]) + b * np.kron(flipped.amplitudes, [0, 1])
    assert [str(x) for x in labs[:3]] == ["a1", "b1", "c1"] and str(anc) == "ea1"
    np.testing.assert_allclose(got.amplitudes, expect, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["A", "B", "C"]))
@settings(max_examples=30)
def test_cnot_z_detection_is_b_squared(seed, target):
    a, b = amplitudes(seed)
    spec = AttackSpec.cnot(a, b, (target,))
    assert detection_probability_exact(spec, "Z") == pytest.approx(abs(b) ** 2, abs=1e-12)
    assert detection_probability_exact(spec, "X") == pytest.approx(0.0, abs=1e-12)


def test_cnot_x_claim_disagrees_for_opposite_amplitudes():
    spec = AttackSpec.cnot(1 / R2, -1 / R2)
    claim = published_claim(spec, "X")
    assert claim.value == pytest.approx(1.5)
    assert detection_probability_exact(spec, "X") == pytest.approx(0.0)


def test_entangle_unitary_structure():
    for name in ("identity", "x", "h", "iy"):
        p = parse_unitary(name)
        u = entangle_unitary(p)
        assert np.allclose(u @ u.conj().T, np.eye(4))
    # identity coupling leaves the qubit untouched and the ancilla in |0>
    assert np.allclose(entangle_unitary(np.eye(2)), np.eye(4))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_entangle_exact_formulas(seed):
    p = random_unitary(np.random.default_rng(seed))
    spec = AttackSpec.entangle_measure(p)
    z = 0.5 * (abs(p[0, 1]) ** 2 + abs(p[1, 0]) ** 2)
    x = 0.25 * (abs(p[0, 0] - p[1, 1]) ** 2 + abs(p[1, 0] - p[0, 1]) ** 2)
    assert detection_probability_exact(spec, "Z") == pytest.approx(z, abs=1e-12)
    assert detection_probability_exact(spec, "X") == pytest.approx(x, abs=1e-12)
    assert published_claim(spec, "Z").value == pytest.approx(z)


def test_entangle_identity_is_invisible():
    spec = AttackSpec.entangle_measure("identity")
    for basis in ("Z", "X"):
        assert detection_probability_exact(spec, basis) == 0


def test_attack_branches_are_a_distribution():
    for spec in (AttackSpec.intercept_resend("X", ("B", "C")), AttackSpec.cnot(0.6, 0.8)):
        br = attack_branches(channel_state_p(1), spec)
        assert sum(w for w, _ in br) == pytest.approx(1.0)


@pytest.mark.parametrize("make", [
    lambda: AttackSpec.cnot(1, 1),
    lambda: AttackSpec.entangle_measure(np.array([[1, 1], [0, 1]])),
    lambda: AttackSpec.intercept_resend("Y"),
    lambda: AttackSpec.intercept_resend("X", ("D",)),
    lambda: AttackSpec.intercept_resend("X", ("B", "B")),
    lambda: parse_unitary("1,2,3"),
])
def test_invalid_specs(make):
    with pytest.raises((InvalidSpec, ValueError)):
        make()


def test_parse_unitary_entries():
    p = parse_unitary("0,1,1,0")
    assert np.allclose(p, qs.X)
    assert np.allclose(parse_unitary("0.7071067811865476,0.7071067811865476i,"
                                     "0.7071067811865476i,0.7071067811865476") @ np.eye(2),
                       np.array([[1, 1j], [1j, 1]]) / R2)


@pytest.mark.parametrize("spec,basis", [
    (AttackSpec.intercept_resend("X"), "Z"),
    (AttackSpec.intercept_resend("random"), "random"),
    (AttackSpec.cnot(0.6, 0.8), "Z"),
    (AttackSpec.entangle_measure("h"), "X"),
])
def test_monte_carlo_within_four_sigma(spec, basis):
    rep = estimate_detection(spec, basis, trials=4000, seed=3)
    se = math.sqrt(rep.exact_probability * (1 - rep.exact_probability) / rep.trials)
    assert abs(rep.mc_estimate - rep.exact_probability) <= 4 * se + 1e-12
    assert rep.consistent


def test_monte_carlo_seeded():
    spec = AttackSpec.cnot(0.6, 0.8)
    a = estimate_detection(spec, "Z", 500, seed=9)
    b = estimate_detection(spec, "Z", 500, seed=9)
    assert a == b


def test_report_provenance():
    d = estimate_detection(AttackSpec.cnot(0, 1), "Z", 100, seed=0).to_dict()
    assert d["exact"]["method"] == "exact"
    assert d["monte_carlo"]["method"] == "monte_carlo"
    assert d["monte_carlo"]["trials"] == 100 and "std_error" in d["monte_carlo"]


def test_aggregate_detection():
    assert aggregate_detection(0.5, 3) == pytest.approx(0.875)
    assert aggregate_detection(0.0, 100) == 0


@pytest.mark.parametrize("disclosure,buckets", [("alice", 4), ("alice+charlie", 8)])
def test_posteriors_uniform(disclosure, buckets):
    post = posterior_over_secrets(disclosure)
    assert len(post) == buckets
    for dist in post.values():
        assert all(abs(v - 0.25) < 1e-9 for v in dist.values())

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cqsdc import qstate as qs
from cqsdc.channels import (
    GHZ_LIKE_INDICES,
    OverlappingPairs,
    bell_decompose,
    bell_expand,
    bell_state,
    channel_state_p,
    dong_channel_state,
    ghz_like,
    identify_bell,
    x_basis_compose,
    x_basis_decompose,
)
from cqsdc.qstate import BellOutcome as B

from conftest import random_state

R2 = math.sqrt(2)


def test_channel_state_amplitudes():
    p = channel_state_p(1)
    assert [str(x) for x in p.labels] == ["a1", "b1", "c1"]
    for bits in ("100", "010", "001", "111"):
        assert p.amplitude(bits) == pytest.approx(0.5)
    assert sum(abs(p.amplitude(b)) for b in ("000", "011", "101", "110")) == 0


def test_channel_is_cnot_of_bell_and_plus():
    # EPR pair on (a, b), |+> on c, CNOT from c onto a
    s = qs.tensor(bell_state(B.PSI_PLUS, ["a1", "b1"]),
                  qs.apply_1q(qs.basis_state("0", ["c1"]), qs.H, "c1"))
    s = qs.apply_cnot(s, "c1", "a1")
    assert s.equiv(channel_state_p(1))


def test_x_form_only_two_terms():
    c = x_basis_decompose(channel_state_p())
    assert c["+++"] == pytest.approx(1 / R2)
    assert c["---"] == pytest.approx(-1 / R2)
    assert all(abs(v) < 1e-12 for k, v in c.items() if k not in ("+++", "---"))


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_x_basis_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    names = [f"q{i + 1}" for i in range(n)]
    s = qs.from_amplitudes(random_state(rng, n), names)
    assert x_basis_compose(x_basis_decompose(s), names).equiv(s)


def test_swapping_identity():
    st_ = qs.tensor(bell_state(B.PHI_PLUS, ["q1", "q2"]), bell_state(B.PHI_PLUS, ["q3", "q4"]))
    d = bell_decompose(st_, ("q1", "q4"), ("q2", "q3"))
    np.testing.assert_allclose(d.coefficients, np.eye(4) / 2, atol=1e-12)


@pytest.mark.parametrize("b1,b2", list(itertools.product(qs.BELL_ORDER, repeat=2)))
def test_swapping_of_every_pair_has_four_equal_cells(b1, b2):
    st_ = qs.tensor(bell_state(b1, ["q1", "q2"]), bell_state(b2, ["q3", "q4"]))
    d = bell_decompose(st_, ("q1", "q4"), ("q2", "q3"))
    mags = np.abs(d.coefficients)
    assert np.count_nonzero(mags > 1e-9) == 4
    assert np.allclose(mags[mags > 1e-9], 0.5)


@given(st.integers(0, 2**32 - 1))
def test_bell_decompose_reconstructs(seed):
    rng = np.random.default_rng(seed)
    names = ["a1", "a2", "b1", "b2", "c1"]
    s = qs.from_amplitudes(random_state(rng, 5), names)
    d = bell_decompose(s, ("b2", "a1"), ("c1", "a2"))
    assert d.total_weight() == pytest.approx(1.0)
    assert d.reconstruct().reorder(names).equiv(s)


def test_bell_expand_full_register():
    s = bell_state(B.PSI_MINUS, ["x1", "x2"])
    e = bell_expand(s, [("x1", "x2")])
    assert e[(B.PSI_MINUS,)] == pytest.approx(1.0)


def test_overlapping_pairs():
    s = qs.basis_state("0000", ["q1", "q2", "q3", "q4"])
    with pytest.raises(OverlappingPairs):
        bell_decompose(s, ("q1", "q2"), ("q2", "q3"))
    with pytest.raises(OverlappingPairs):
        bell_expand(s, [("q1", "q2"), ("q1", "q3")])


def test_identify_bell():
    s = qs.from_amplitudes(-1j * B.PHI_MINUS.vector, ["q1", "q2"])
    kind, phase = identify_bell(s)
    assert kind is B.PHI_MINUS and phase == pytest.approx(-1j)
    assert identify_bell(qs.basis_state("01", ["q1", "q2"])) is None


def test_ghz_like_basis_is_orthonormal():
    m = np.array([ghz_like(i).amplitudes for i in GHZ_LIKE_INDICES])
    np.testing.assert_allclose(m.conj() @ m.T, np.eye(8), atol=1e-12)


def test_ghz_like_as_printed_is_degenerate():
    assert ghz_like("010", printed=True).equiv(
        qs.from_amplitudes(-ghz_like("111").amplitudes, ghz_like("111").labels))


@pytest.mark.parametrize("index", GHZ_LIKE_INDICES)
@pytest.mark.parametrize("bit", "01")
def test_ghz_like_leaves_bell_pair_after_z_on_third(index, bit):
    p, post = qs.postselect(ghz_like(index), ["q3"], "Z", bit)
    assert p == pytest.approx(0.5)
    rest = qs.from_amplitudes(post.reorder(["q1", "q2", "q3"]).amplitudes[int(bit)::2], ["q1", "q2"])
    assert identify_bell(rest) is not None


def test_ghz_like_index_validation():
    assert ghz_like(5).equiv(ghz_like("101"))
    with pytest.raises(ValueError):
        ghz_like("2")


def test_even_parity_variant():
    d = dong_channel_state()
    assert d.amplitude("000") == pytest.approx(0.5)
    assert d.amplitude("001") == 0

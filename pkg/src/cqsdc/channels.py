"""Named states of the protocol and exact basis decompositions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qstate import (
    BELL_ORDER,
    SQRT1_2,
    TOL,
    BellOutcome,
    LabelLike,
    QubitLabel,
    StateVector,
    UnknownLabel,
    QStateError,
    _make,
    as_label,
    from_amplitudes,
)


class OverlappingPairs(QStateError):
    pass


def _labs(default: Sequence[str], given) -> tuple[QubitLabel, ...]:
    return tuple(as_label(x) for x in (given if given is not None else default))


def bell_state(kind, labels: Sequence[LabelLike] | None = None) -> StateVector:
    kind = BellOutcome.parse(kind)
    return from_amplitudes(kind.vector, _labs(("q1", "q2"), labels))


def _single(bit: int) -> np.ndarray:
    v = np.zeros(2, dtype=complex)
    v[bit] = 1.0
    return v


# Each GHZ-like basis state is (1/sqrt2)(s1 |bell1, bit1> + s2 |bell2, bit2>),
# with the Bell pair on qubits 1,2 and the single qubit 3.
# "010" carries a + where the commonly printed table has a -; with the minus
# it equals -|111> and the eight states no longer span the space.
_GHZ_LIKE_TERMS = {
    "000": ((1, BellOutcome.PSI_PLUS, 0), (1, BellOutcome.PSI_MINUS, 1)),
    "001": ((1, BellOutcome.PSI_PLUS, 0), (-1, BellOutcome.PSI_MINUS, 1)),
    "010": ((1, BellOutcome.PSI_MINUS, 0), (1, BellOutcome.PSI_PLUS, 1)),
    "011": ((1, BellOutcome.PHI_PLUS, 1), (-1, BellOutcome.PHI_MINUS, 0)),
    "100": ((1, BellOutcome.PHI_PLUS, 0), (1, BellOutcome.PHI_MINUS, 1)),
    "101": ((1, BellOutcome.PHI_PLUS, 0), (-1, BellOutcome.PHI_MINUS, 1)),
    "110": ((1, BellOutcome.PHI_MINUS, 0), (1, BellOutcome.PHI_PLUS, 1)),
    "111": ((1, BellOutcome.PSI_PLUS, 1), (-1, BellOutcome.PSI_MINUS, 0)),
}

PRINTED_GHZ_LIKE_010 = ((1, BellOutcome.PSI_MINUS, 0), (-1, BellOutcome.PSI_PLUS, 1))

GHZ_LIKE_INDICES = tuple(_GHZ_LIKE_TERMS)


def ghz_like(index: str | int, labels: Sequence[LabelLike] | None = None,
             printed: bool = False) -> StateVector:
    """One of the eight GHZ-like basis states, indexed ``"000"`` .. ``"111"``.

    ``printed=True`` returns the as-printed sign for index ``"010"``.
    """
    if isinstance(index, int):
        index = format(index, "03b")
    if index not in _GHZ_LIKE_TERMS:
        raise ValueError(f"GHZ-like index must be a 3-bit string, got {index!r}")
    terms = PRINTED_GHZ_LIKE_010 if printed and index == "010" else _GHZ_LIKE_TERMS[index]
    amps = np.zeros(8, dtype=complex)
    for sign, bell, bit in terms:
        amps += sign * SQRT1_2 * np.kron(bell.vector, _single(bit))
    return from_amplitudes(amps, _labs(("q1", "q2", "q3"), labels))


def triple_labels(i: int) -> tuple[QubitLabel, QubitLabel, QubitLabel]:
    return QubitLabel("a", i), QubitLabel("b", i), QubitLabel("c", i)


def channel_state_p(i: int = 1, labels: Sequence[LabelLike] | None = None) -> StateVector:
    """The odd-parity channel triple (|100>+|010>+|001>+|111>)/2 on (a_i, b_i, c_i)."""
    amps = np.zeros(8, dtype=complex)
    amps[[0b100, 0b010, 0b001, 0b111]] = 0.5
    return from_amplitudes(amps, labels if labels is not None else triple_labels(i))


def dong_channel_state(labels: Sequence[LabelLike] | None = None) -> StateVector:
    """The even-parity triple (|000>+|110>+|011>+|101>)/2."""
    amps = np.zeros(8, dtype=complex)
    amps[[0b000, 0b110, 0b011, 0b101]] = 0.5
    return from_amplitudes(amps, _labs(("q1", "q2", "q3"), labels))


def _signs(n: int):
    for bits in itertools.product("+-", repeat=n):
        yield "".join(bits)


def _hadamard_all(amps: np.ndarray, n: int) -> np.ndarray:
    # H^{(x)n}: X-basis coefficient for sign string s is <s|psi>
    t = amps.reshape([2] * n)
    h = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2
    for ax in range(n):
        t = np.moveaxis(np.tensordot(h, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def x_basis_decompose(state: StateVector) -> dict[str, complex]:
    """Coefficients of ``state`` in the product {+,-} basis, keyed like ``"+-+"``."""
    n = state.num_qubits
    c = _hadamard_all(state.amplitudes, n)
    return {s: complex(v) for s, v in zip(_signs(n), c)}


def x_basis_compose(coeffs: dict[str, complex], labels: Sequence[LabelLike]) -> StateVector:
    """Inverse of :func:`x_basis_decompose`."""
    n = len(labels)
    c = np.array([coeffs.get(s, 0.0) for s in _signs(n)], dtype=complex)
    return from_amplitudes(_hadamard_all(c, n), labels)


def bell_expand(state: StateVector, pairs: Sequence[tuple[LabelLike, LabelLike]]) -> dict[tuple, complex]:
    """Full expansion over a Bell basis on every listed pair.

    The pairs must cover the register exactly; keys are tuples of
    :class:`BellOutcome`, one per pair.
    """
    order = [as_label(x) for p in pairs for x in p]
    if len(set(order)) != len(order):
        raise OverlappingPairs("pairs share a qubit")
    s = state.reorder(order)
    k = len(pairs)
    basis = np.array([b.vector for b in BELL_ORDER])  # rows: Bell vectors
    t = s.amplitudes.reshape([4] * k)
    for ax in range(k):
        t = np.moveaxis(np.tensordot(basis.conj(), t, axes=([1], [ax])), 0, ax)
    flat = t.reshape(-1)
    keys = itertools.product(BELL_ORDER, repeat=k)
    return {key: complex(v) for key, v in zip(keys, flat)}


@dataclass(frozen=True)
class BellCoefficients:
    """Two-pair Bell decomposition with per-cell residual states.

    ``coefficients[i, j]`` multiplies ``|B_i>_pair1 |B_j>_pair2 |residual_ij>``
    with ``B`` in :data:`BELL_ORDER`.  Each residual is normalized and its
    first significant amplitude made real positive, so the coefficient holds
    both the weight and the sign of the cell.
    """

    pair1: tuple[QubitLabel, QubitLabel]
    pair2: tuple[QubitLabel, QubitLabel]
    rest: tuple[QubitLabel, ...]
    coefficients: np.ndarray
    residuals: dict

    def coefficient(self, b1, b2) -> complex:
        return complex(self.coefficients[BELL_ORDER.index(BellOutcome.parse(b1)),
                                         BELL_ORDER.index(BellOutcome.parse(b2))])

    def residual(self, b1, b2) -> StateVector | None:
        return self.residuals.get((BellOutcome.parse(b1), BellOutcome.parse(b2)))

    def nonzero(self, tol: float = TOL) -> dict[tuple[BellOutcome, BellOutcome], complex]:
        out = {}
        for i, b1 in enumerate(BELL_ORDER):
            for j, b2 in enumerate(BELL_ORDER):
                if abs(self.coefficients[i, j]) > tol:
                    out[(b1, b2)] = complex(self.coefficients[i, j])
        return out

    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def reconstruct(self) -> StateVector:
        labs = self.pair1 + self.pair2 + self.rest
        amps = np.zeros(1 << len(labs), dtype=complex)
        for i, b1 in enumerate(BELL_ORDER):
            for j, b2 in enumerate(BELL_ORDER):
                c = self.coefficients[i, j]
                if c == 0:
                    continue
                r = self.residuals[(b1, b2)]
                tail = r.amplitudes if r is not None else np.ones(1, dtype=complex)
                amps += c * np.kron(np.kron(b1.vector, b2.vector), tail)
        return _make(amps, labs)


def bell_decompose(state: StateVector, pair1, pair2, tol: float = 1e-12) -> BellCoefficients:
    """Decompose over Bell bases on two disjoint pairs, keeping leftover qubits as residuals."""
    p1 = tuple(as_label(x) for x in pair1)
    p2 = tuple(as_label(x) for x in pair2)
    if len(set(p1 + p2)) != 4:
        raise OverlappingPairs(f"pairs {p1} and {p2} overlap")
    for x in p1 + p2:
        if x not in state.labels:
            raise UnknownLabel(f"{x} not in register")
    rest = tuple(x for x in state.labels if x not in p1 + p2)
    s = state.reorder(p1 + p2 + rest)
    m = s.amplitudes.reshape(4, 4, -1)
    basis = np.array([b.vector for b in BELL_ORDER])
    cells = np.einsum("ip,jq,pqr->ijr", basis.conj(), basis.conj(), m)
    coeffs = np.zeros((4, 4), dtype=complex)
    residuals = {}
    for i, b1 in enumerate(BELL_ORDER):
        for j, b2 in enumerate(BELL_ORDER):
            r = cells[i, j]
            w = math.sqrt(float(np.vdot(r, r).real))
            if w < tol:
                residuals[(b1, b2)] = None
                continue
            if not rest:
                coeffs[i, j] = r[0]
                residuals[(b1, b2)] = None
                continue
            lead = r[np.argmax(np.abs(r) > 1e-9 * w)]
            phase = lead / abs(lead)
            coeffs[i, j] = w * phase
            residuals[(b1, b2)] = _make(np.ascontiguousarray(r / (w * phase)), rest)
    return BellCoefficients(p1, p2, rest, coeffs, residuals)


def identify_bell(state: StateVector, pair=None, tol: float = TOL) -> tuple[BellOutcome, complex] | None:
    """If a two-qubit state equals a Bell state up to phase, return (kind, phase)."""
    if state.num_qubits != 2:
        return None
    if pair is not None:
        state = state.reorder(pair)
    for b in BELL_ORDER:
        ov = complex(np.vdot(b.vector, state.amplitudes))
        if abs(abs(ov) - 1.0) < tol:
            return b, ov
    return None


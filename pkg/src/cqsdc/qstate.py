"""Exact statevector engine for small labelled registers.

Amplitudes are stored as a flat complex128 array.  The leftmost label is the
most significant bit of the basis index, so ``|100>`` on labels ``(a, b, c)``
has ``a = 1``.  States are immutable: every operation returns a new value.
"""
from __future__ import annotations

import enum
import functools
import math
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from . import kernels

TOL = 1e-9
MAX_QUBITS = 12
# probabilities below this are float residue from cancellation, not outcomes
_DUST = 1e-12

SQRT1_2 = 1.0 / math.sqrt(2.0)


class QStateError(ValueError):
    """Base class for statevector errors."""


class NonNormalized(QStateError):
    pass


class LengthMismatch(QStateError):
    pass


class DuplicateLabel(QStateError):
    pass


class UnknownLabel(QStateError):
    pass


class SameQubit(QStateError):
    pass


class NotUnitary(QStateError):
    pass


_LABEL_RE = re.compile(r"^([A-Za-z_]+)(\d+)$")


@dataclass(frozen=True, order=True)
class QubitLabel:
    """A qubit identified by its sequence letter(s) and 1-based index."""

    sequence: str
    index: int

    def __post_init__(self):
        if not self.sequence or self.index < 0:
            raise ValueError(f"invalid qubit label {self.sequence!r}{self.index}")

    def __str__(self) -> str:
        return f"{self.sequence}{self.index}"

    def __repr__(self) -> str:
        return f"QubitLabel({self})"

    @classmethod
    @functools.lru_cache(maxsize=4096)
    def parse(cls, text: str) -> "QubitLabel":
        m = _LABEL_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse qubit label {text!r}")
        return cls(m.group(1), int(m.group(2)))


LabelLike = Union[QubitLabel, str]


def as_label(x: LabelLike) -> QubitLabel:
    if isinstance(x, QubitLabel):
        return x
    return QubitLabel.parse(x)


def labels(*names: LabelLike) -> tuple[QubitLabel, ...]:
    """``labels("a1", "b1")`` -> tuple of :class:`QubitLabel`."""
    return tuple(as_label(x) for x in names)


class Basis(str, enum.Enum):
    Z = "Z"
    X = "X"
    BELL = "Bell"

    @classmethod
    def parse(cls, text: "str | Basis") -> "Basis":
        if isinstance(text, Basis):
            return text
        try:
            return _BASIS_NAMES[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown basis {text!r}") from None


_BASIS_NAMES = {b.value.lower(): b for b in Basis}


class BellOutcome(str, enum.Enum):
    """The four Bell states.  ``phase`` is 0 for +, ``letter`` is 0 for phi."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def phase(self) -> int:
        return 1 if self.value.endswith("-") else 0

    @property
    def letter(self) -> int:
        return 1 if self.value.startswith("psi") else 0

    @property
    def symbol(self) -> str:
        return ("Φ" if self.letter == 0 else "Ψ") + ("-" if self.phase else "+")

    @property
    def vector(self) -> np.ndarray:
        return _BELL_VECTORS[self].copy()

    @classmethod
    def from_bits(cls, phase: int, letter: int) -> "BellOutcome":
        return _BELL_BY_BITS[(phase, letter)]

    @classmethod
    def parse(cls, text: "str | BellOutcome") -> "BellOutcome":
        if isinstance(text, BellOutcome):
            return text
        t = text.strip().lower().replace("φ", "phi").replace("ψ", "psi")
        t = t.replace("plus", "+").replace("minus", "-").replace("_", "")
        for b in cls:
            if b.value == t:
                return b
        raise ValueError(f"unknown Bell outcome {text!r}")

    def __str__(self) -> str:
        return self.value


BELL_ORDER = (
    BellOutcome.PHI_PLUS,
    BellOutcome.PHI_MINUS,
    BellOutcome.PSI_PLUS,
    BellOutcome.PSI_MINUS,
)

_BELL_VECTORS = {
    BellOutcome.PHI_PLUS: np.array([SQRT1_2, 0, 0, SQRT1_2], dtype=complex),
    BellOutcome.PHI_MINUS: np.array([SQRT1_2, 0, 0, -SQRT1_2], dtype=complex),
    BellOutcome.PSI_PLUS: np.array([0, SQRT1_2, SQRT1_2, 0], dtype=complex),
    BellOutcome.PSI_MINUS: np.array([0, SQRT1_2, -SQRT1_2, 0], dtype=complex),
}
_BELL_BY_BITS = {(b.phase, b.letter): b for b in BellOutcome}
_BELL_PROJECTORS = {b: np.outer(v, v.conj()) for b, v in _BELL_VECTORS.items()}


# Single-qubit gates.  IY is i*sigma_y = |0><1| - |1><0|.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
IY = np.array([[0, 1], [-1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2


_KNOWN_GATES = (I2, X, Y, IY, Z, H)


def check_unitary(u: np.ndarray, tol: float = TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotUnitary(f"gate must be square, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise NotUnitary("gate has non-finite entries")
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > tol:
        raise NotUnitary("gate is not unitary within tolerance")
    return u


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over an ordered tuple of qubit labels."""

    amplitudes: np.ndarray
    labels: tuple[QubitLabel, ...]

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def index_of(self, label: LabelLike) -> int:
        lab = as_label(label)
        try:
            return self.labels.index(lab)
        except ValueError:
            raise UnknownLabel(f"{lab} not in register {[str(x) for x in self.labels]}") from None

    def positions(self, targets: Iterable[LabelLike]) -> list[int]:
        return [self.index_of(t) for t in targets]

    def amplitude(self, bits: str) -> complex:
        """Amplitude of the basis state written as a bit string in label order."""
        if len(bits) != self.num_qubits:
            raise LengthMismatch(f"expected {self.num_qubits} bits, got {bits!r}")
        return complex(self.amplitudes[int(bits, 2)])

    def norm(self) -> float:
        return math.sqrt(kernels.norm2(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """<self|other> after aligning ``other`` to this label order."""
        other = other.reorder(self.labels)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def reorder(self, order: Sequence[LabelLike]) -> "StateVector":
        order = tuple(as_label(x) for x in order)
        if order == self.labels:
            return self
        if sorted(order) != sorted(self.labels):
            raise UnknownLabel(f"cannot reorder {self.labels} into {order}")
        perm = [self.labels.index(x) for x in order]
        t = self.amplitudes.reshape([2] * self.num_qubits)
        amps = np.ascontiguousarray(np.transpose(t, perm).reshape(-1))
        return _make(amps, order)

    def relabel(self, mapping: dict) -> "StateVector":
        new = tuple(as_label(mapping.get(str(x), mapping.get(x, x))) for x in self.labels)
        _check_unique(new)
        return _make(self.amplitudes, new)

    def equiv(self, other: "StateVector", tol: float = TOL, up_to_phase: bool = False) -> bool:
        if sorted(self.labels) != sorted(other.labels):
            return False
        o = other.reorder(self.labels).amplitudes
        if up_to_phase:
            return abs(abs(np.vdot(self.amplitudes, o)) - 1.0) < tol
        return bool(np.max(np.abs(self.amplitudes - o)) < tol)

    def ket(self, tol: float = 1e-12) -> str:
        terms = []
        n = self.num_qubits
        for i, a in enumerate(self.amplitudes):
            if abs(a) > tol:
                terms.append(f"({a.real:+.4f}{a.imag:+.4f}j)|{i:0{n}b}>")
        return " ".join(terms) + "  on " + ",".join(str(x) for x in self.labels)

    def __repr__(self) -> str:
        return f"StateVector({self.ket()})"


def _check_unique(labs: Sequence[QubitLabel]) -> None:
    if len(set(labs)) != len(labs):
        seen, dup = set(), []
        for x in labs:
            if x in seen:
                dup.append(str(x))
            seen.add(x)
        raise DuplicateLabel(f"duplicate labels: {dup}")


def _make(amps: np.ndarray, labs: tuple[QubitLabel, ...]) -> StateVector:
    amps.setflags(write=False)
    return StateVector(amps, labs)


def from_amplitudes(amps, labels: Sequence[LabelLike]) -> StateVector:
    """Build a state from raw amplitudes, rejecting anything not unit-norm."""
    a = np.array(amps, dtype=np.complex128).reshape(-1)
    labs = tuple(as_label(x) for x in labels)
    m = a.shape[0]
    if m == 0 or m & (m - 1):
        raise LengthMismatch(f"amplitude count {m} is not a power of two")
    n = m.bit_length() - 1
    if n != len(labs):
        raise LengthMismatch(f"{m} amplitudes need {n} labels, got {len(labs)}")
    if n > MAX_QUBITS:
        raise LengthMismatch(f"registers are limited to {MAX_QUBITS} qubits")
    _check_unique(labs)
    if not np.all(np.isfinite(a)):
        raise NonNormalized("amplitudes contain NaN or Inf")
    nrm = float(np.vdot(a, a).real)
    if abs(nrm - 1.0) > TOL:
        raise NonNormalized(f"squared norm {nrm!r} deviates from 1")
    return _make(a, labs)


def basis_state(bits: str, labels: Sequence[LabelLike]) -> StateVector:
    a = np.zeros(1 << len(bits), dtype=complex)
    a[int(bits, 2)] = 1.0
    return from_amplitudes(a, labels)


def tensor(left: StateVector, right: StateVector) -> StateVector:
    labs = left.labels + right.labels
    _check_unique(labs)
    if len(labs) > MAX_QUBITS:
        raise LengthMismatch(f"registers are limited to {MAX_QUBITS} qubits")
    return _make(kernels.kron(left.amplitudes, right.amplitudes), labs)


def tensor_all(states: Iterable[StateVector]) -> StateVector:
    it = iter(states)
    out = next(it)
    for s in it:
        out = tensor(out, s)
    return out


def apply_1q(state: StateVector, gate: np.ndarray, target: LabelLike) -> StateVector:
    pos = state.index_of(target)
    g = np.asarray(gate, dtype=complex)
    if not any(gate is k for k in _KNOWN_GATES):
        check_unitary(g)
        if g.shape != (2, 2):
            raise NotUnitary(f"single-qubit gate must be 2x2, got {g.shape}")
    return _make(kernels.apply_1q(state.amplitudes, state.num_qubits, pos, g), state.labels)


def apply_2q(state: StateVector, gate: np.ndarray, first: LabelLike, second: LabelLike) -> StateVector:
    """Apply a 4x4 matrix to an ordered pair; ``first`` is the high bit of the gate index."""
    p1, p2 = state.index_of(first), state.index_of(second)
    if p1 == p2:
        raise SameQubit(f"{as_label(first)} used twice")
    g = np.asarray(gate, dtype=complex)
    return _make(kernels.apply_2q(state.amplitudes, state.num_qubits, p1, p2, g), state.labels)


def apply_cnot(state: StateVector, control: LabelLike, target: LabelLike) -> StateVector:
    c, t = state.index_of(control), state.index_of(target)
    if c == t:
        raise SameQubit(f"{as_label(control)} is both control and target")
    return _make(kernels.apply_cnot(state.amplitudes, state.num_qubits, c, t), state.labels)


class MeasurementRecord(NamedTuple):
    basis: Basis
    targets: tuple[QubitLabel, ...]
    outcome: object
    probability: float


class Measured(NamedTuple):
    outcome: object
    state: StateVector
    record: MeasurementRecord


def _rotate_to_z(state: StateVector, targets: Sequence[LabelLike], basis: Basis) -> StateVector:
    if basis is Basis.X:
        for t in targets:
            state = apply_1q(state, H, t)
    return state


def _key(k: int, width: int, basis: Basis) -> str:
    bits = format(k, f"0{width}b")
    if basis is Basis.X:
        return bits.replace("0", "+").replace("1", "-")
    return bits


def _parse_key(outcome: str, basis: Basis) -> int:
    if basis is Basis.X:
        outcome = outcome.replace("+", "0").replace("-", "1")
    return int(outcome, 2)


def _clean(p: np.ndarray) -> np.ndarray:
    p = np.where(p < _DUST, 0.0, p)
    return p / p.sum()


def _bell_weights(state: StateVector, pair) -> list[tuple[BellOutcome, float, np.ndarray]]:
    p1, p2 = state.positions(pair)
    if p1 == p2:
        raise SameQubit(f"{as_label(pair[0])} used twice")
    n = state.num_qubits
    out = []
    for b in BELL_ORDER:
        proj = kernels.apply_2q(state.amplitudes, n, p1, p2, _BELL_PROJECTORS[b])
        out.append((b, kernels.norm2(proj), proj))
    return out


def outcome_distribution(state: StateVector, targets: Sequence[LabelLike], basis="Z") -> dict:
    """Exact outcome probabilities for measuring ``targets`` in ``basis``.

    Z and X outcomes are keyed by strings (``"01"``, ``"+-"``) in target
    order; Bell outcomes by :class:`BellOutcome`.
    """
    basis = Basis.parse(basis)
    targets = list(targets)
    if not targets:
        raise UnknownLabel("no measurement targets")
    if basis is Basis.BELL:
        if len(targets) != 2:
            raise SameQubit("Bell measurement needs exactly two qubits")
        ws = _bell_weights(state, targets)
        p = _clean(np.array([w for _, w, _ in ws]))
        return {b: float(x) for (b, _, _), x in zip(ws, p)}
    pos = state.positions(targets)
    if len(set(pos)) != len(pos):
        raise SameQubit("repeated measurement target")
    rot = _rotate_to_z(state, targets, basis)
    p = _clean(kernels.marginal(rot.amplitudes, rot.num_qubits, pos))
    return {_key(k, len(pos), basis): float(x) for k, x in enumerate(p)}


def postselect(state: StateVector, targets: Sequence[LabelLike], basis, outcome) -> tuple[float, StateVector | None]:
    """Project onto one outcome; returns (probability, renormalized state or None)."""
    basis = Basis.parse(basis)
    targets = list(targets)
    if basis is Basis.BELL:
        outcome = BellOutcome.parse(outcome)
        for b, w, proj in _bell_weights(state, targets):
            if b is outcome:
                if w < _DUST:
                    return 0.0, None
                return w, _make(proj / math.sqrt(w), state.labels)
    pos = state.positions(targets)
    k = _parse_key(outcome, basis)
    rot = _rotate_to_z(state, targets, basis)
    proj = kernels.project(rot.amplitudes, rot.num_qubits, pos, k)
    w = kernels.norm2(proj)
    if w < _DUST:
        return 0.0, None
    post = _rotate_to_z(_make(proj / math.sqrt(w), state.labels), targets, basis)
    return w, post


def _draw(rng) -> float:
    return float(rng.random())


def measure(state: StateVector, targets: Sequence[LabelLike], basis, rng) -> Measured:
    """Sample a joint Z or X measurement of ``targets``; consumes one uniform."""
    basis = Basis.parse(basis)
    if basis is Basis.BELL:
        return measure_bell(state, tuple(targets), rng)
    targets = list(targets)
    if not targets:
        raise UnknownLabel("no measurement targets")
    pos = state.positions(targets)
    rot = _rotate_to_z(state, targets, basis)
    n = rot.num_qubits
    p = kernels.marginal(rot.amplitudes, n, pos)
    k = int(kernels.sample(p, _draw(rng), _DUST))
    proj = kernels.project(rot.amplitudes, n, pos, k)
    w = kernels.norm2(proj)
    post = _rotate_to_z(_make(proj / math.sqrt(w), state.labels), targets, basis)
    key = _key(k, len(pos), basis)
    rec = MeasurementRecord(basis, tuple(rot.labels[i] for i in pos), key, w)
    return Measured(key, post, rec)


def measure_bell(state: StateVector, pair: tuple[LabelLike, LabelLike], rng) -> Measured:
    """Sample a Bell measurement on an ordered pair via the four projectors."""
    if len(pair) != 2:
        raise SameQubit("Bell measurement needs exactly two qubits")
    ws = _bell_weights(state, pair)
    p = np.array([w for _, w, _ in ws])
    k = int(kernels.sample(p, _draw(rng), _DUST))
    b, w, proj = ws[k]
    post = _make(proj / math.sqrt(w), state.labels)
    rec = MeasurementRecord(Basis.BELL, tuple(as_label(t) for t in pair), b, w)
    return Measured(b, post, rec)


def partial_trace_pure(state: StateVector, keep: Sequence[LabelLike]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in that order)."""
    keep = [as_label(x) for x in keep]
    rest = [x for x in state.labels if x not in keep]
    s = state.reorder(keep + rest)
    m = s.amplitudes.reshape(1 << len(keep), -1)
    return m @ m.conj().T

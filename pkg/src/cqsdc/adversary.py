"""Eavesdropping attacks on the channel triples and their detectability.

Three attacks act on qubits in transit (the B and C sequences by default):

* intercept-resend: Eve measures in Z or X and forwards the eigenstate seen;
* CNOT: Eve's ancilla ``a|0> + b|1>`` controls a CNOT onto the channel qubit;
* entangle-measure: a two-qubit unitary couples the channel qubit to an
  ancilla, ``|x>|0> -> sum_y p_xy |y>|x XOR y>``.

Detection probabilities are computed exactly from outcome distributions and
cross-checked by Monte Carlo.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qstate as qs
from .channels import channel_state_p
from .protocol import SECRETS, all_branches, check_valid
from .qstate import QubitLabel, StateVector


class InvalidSpec(ValueError):
    pass


class AttackKind(str, enum.Enum):
    INTERCEPT_RESEND = "intercept"
    CNOT = "cnot"
    ENTANGLE_MEASURE = "entangle"


class Disclosure(str, enum.Enum):
    ALICE_BITS_ONLY = "alice"
    ALICE_AND_CHARLIE_BITS = "alice+charlie"


NAMED_UNITARIES = {
    "identity": qs.I2,
    "x": qs.X,
    "y": qs.Y,
    "iy": qs.IY,
    "z": qs.Z,
    "h": qs.H,
}


def parse_unitary(text: str) -> np.ndarray:
    """A named 2x2 unitary, or four comma-separated complex entries p00,p01,p10,p11."""
    t = text.strip().lower()
    if t in NAMED_UNITARIES:
        return NAMED_UNITARIES[t].copy()
    try:
        vals = [complex(v.replace(" ", "").replace("i", "j")) for v in t.split(",")]
    except ValueError as e:
        raise InvalidSpec(f"cannot parse unitary {text!r}") from e
    if len(vals) != 4:
        raise InvalidSpec("explicit unitary needs four entries p00,p01,p10,p11")
    return np.array(vals, dtype=complex).reshape(2, 2)


def random_unitary(rng) -> np.ndarray:
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True, eq=False)
class AttackSpec:
    kind: AttackKind
    targets: tuple[str, ...] = ("B",)
    eve_basis: str | None = None  # "Z", "X" or "random" for intercept-resend
    ancilla: tuple[complex, complex] | None = None
    p: np.ndarray | None = None

    def __post_init__(self):
        if not self.targets or len(set(self.targets)) != len(self.targets):
            raise InvalidSpec("targets must be a non-empty set of sequences")
        for t in self.targets:
            if t not in ("A", "B", "C"):
                raise InvalidSpec(f"unknown target sequence {t!r}")
        if self.kind is AttackKind.INTERCEPT_RESEND:
            if self.eve_basis not in ("Z", "X", "random"):
                raise InvalidSpec("intercept-resend needs eve_basis Z, X or random")
        elif self.kind is AttackKind.CNOT:
            if self.ancilla is None:
                raise InvalidSpec("CNOT attack needs ancilla amplitudes (a, b)")
            a, b = self.ancilla
            if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > qs.TOL:
                raise InvalidSpec("ancilla amplitudes must satisfy |a|^2 + |b|^2 = 1")
        elif self.kind is AttackKind.ENTANGLE_MEASURE:
            if self.p is None:
                raise InvalidSpec("entangle-measure attack needs a unitary p")
            try:
                qs.check_unitary(self.p)
            except qs.NotUnitary as e:
                raise InvalidSpec(str(e)) from e
            if self.p.shape != (2, 2):
                raise InvalidSpec("p must be 2x2")

    @classmethod
    def intercept_resend(cls, eve_basis: str = "random", targets: Sequence[str] = ("B",)) -> "AttackSpec":
        eb = eve_basis if eve_basis == "random" else qs.Basis.parse(eve_basis).value
        return cls(AttackKind.INTERCEPT_RESEND, tuple(targets), eve_basis=eb)

    @classmethod
    def cnot(cls, a: complex, b: complex, targets: Sequence[str] = ("B",)) -> "AttackSpec":
        return cls(AttackKind.CNOT, tuple(targets), ancilla=(complex(a), complex(b)))

    @classmethod
    def entangle_measure(cls, p, targets: Sequence[str] = ("B",)) -> "AttackSpec":
        if isinstance(p, str):
            p = parse_unitary(p)
        return cls(AttackKind.ENTANGLE_MEASURE, tuple(targets), p=np.asarray(p, dtype=complex))

    @functools.cached_property
    def unitary4(self) -> np.ndarray:
        return entangle_unitary(self.p)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "targets": list(self.targets)}
        if self.kind is AttackKind.INTERCEPT_RESEND:
            d["eve_basis"] = self.eve_basis
        elif self.kind is AttackKind.CNOT:
            d["ancilla"] = {"a": _cplx(self.ancilla[0]), "b": _cplx(self.ancilla[1])}
        else:
            d["p"] = [[_cplx(v) for v in row] for row in self.p]
        return d


def _cplx(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def entangle_unitary(p: np.ndarray) -> np.ndarray:
    """4x4 matrix on (channel, ancilla): |x>|e> -> sum_y p[x, y] |y>|x^y^e>."""
    u = np.zeros((4, 4), dtype=complex)
    for x in (0, 1):
        for e in (0, 1):
            for y in (0, 1):
                u[2 * y + (x ^ y ^ e), 2 * x + e] += p[x, y]
    return u


def _target_label(state: StateVector, seq: str) -> QubitLabel:
    found = [x for x in state.labels if x.sequence == seq.lower()]
    if len(found) != 1:
        raise InvalidSpec(f"expected one {seq} qubit in the triple, found {len(found)}")
    return found[0]


def ancilla_label(target: QubitLabel) -> QubitLabel:
    return QubitLabel("e" + target.sequence, target.index)


@functools.lru_cache(maxsize=256)
def _ancilla(amps: tuple[complex, complex], label: QubitLabel) -> StateVector:
    return qs.from_amplitudes(np.array(amps, dtype=complex), [label])


def apply_attack(triple: StateVector, spec: AttackSpec, rng=None) -> StateVector:
    """Apply ``spec`` to a channel triple; CNOT and entangle attacks adjoin one ancilla per target."""
    state = triple
    for seq in spec.targets:
        q = _target_label(state, seq)
        if spec.kind is AttackKind.INTERCEPT_RESEND:
            if rng is None:
                raise InvalidSpec("intercept-resend needs a random source")
            basis = spec.eve_basis
            if basis == "random":
                basis = "Z" if rng.random() < 0.5 else "X"
            # the collapsed qubit is exactly the eigenstate Eve resends
            state = qs.measure(state, [q], basis, rng).state
        elif spec.kind is AttackKind.CNOT:
            e = ancilla_label(q)
            state = qs.apply_cnot(qs.tensor(state, _ancilla(spec.ancilla, e)), e, q)
        else:
            e = ancilla_label(q)
            state = qs.tensor(state, _ancilla((1.0, 0.0), e))
            state = qs.apply_2q(state, spec.unitary4, q, e)
    return state


def attack_branches(triple: StateVector, spec: AttackSpec) -> list[tuple[float, StateVector]]:
    """Exact (probability, state) branches of an attacked triple.

    Only intercept-resend branches; the other attacks are a single unitary branch.
    """
    if spec.kind is not AttackKind.INTERCEPT_RESEND:
        return [(1.0, apply_attack(triple, spec))]
    branches = [(1.0, triple)]
    for seq in spec.targets:
        q = _target_label(triple, seq)
        bases = [(1.0, spec.eve_basis)] if spec.eve_basis != "random" else [(0.5, "Z"), (0.5, "X")]
        nxt = []
        for w, st in branches:
            for wb, basis in bases:
                for outcome, p in qs.outcome_distribution(st, [q], basis).items():
                    if p <= 0:
                        continue
                    _, post = qs.postselect(st, [q], basis, outcome)
                    nxt.append((w * wb * p, post))
        branches = nxt
    return branches


def invalid_probability(state: StateVector, basis, i: int = 1) -> float:
    """Probability that a check on triple ``i`` in ``basis`` fails the correlation test."""
    parties = (QubitLabel("a", i), QubitLabel("b", i), QubitLabel("c", i))
    b = qs.Basis.parse(basis)
    dist = qs.outcome_distribution(state, parties, b)
    return sum(p for k, p in dist.items() if not check_valid(b, k[0], k[1], k[2]))


def detection_probability_exact(spec: AttackSpec, check_basis="Z") -> float:
    """Exact chance that one attacked check round reports an invalid result."""
    if check_basis == "random":
        return 0.5 * (detection_probability_exact(spec, "Z") + detection_probability_exact(spec, "X"))
    fresh = channel_state_p(1)
    return float(sum(w * invalid_probability(st, check_basis) for w, st in attack_branches(fresh, spec)))


def aggregate_detection(p: float, rounds: int) -> float:
    """Chance that at least one of ``rounds`` independent check rounds flags Eve."""
    return 1.0 - (1.0 - p) ** rounds


@dataclass(frozen=True)
class PublishedClaim:
    citation: str
    value: float

    def to_dict(self) -> dict:
        return {"citation": self.citation, "value": self.value}


def published_claim(spec: AttackSpec, check_basis) -> PublishedClaim | None:
    """The published detection formula for this attack and basis, if one exists."""
    if len(spec.targets) != 1 or check_basis == "random":
        return None
    basis = qs.Basis.parse(check_basis).value
    if spec.kind is AttackKind.INTERCEPT_RESEND:
        if spec.eve_basis == "random":
            return None
        if spec.eve_basis == basis:
            return PublishedClaim(f"intercept-resend, Eve {spec.eve_basis} / check {basis}: not detected", 0.0)
        return PublishedClaim(f"intercept-resend, Eve {spec.eve_basis} / check {basis}: 1/2", 0.5)
    if spec.kind is AttackKind.CNOT:
        a, b = spec.ancilla
        if basis == "Z":
            return PublishedClaim("CNOT attack, Z check: |b|^2", abs(b) ** 2)
        return PublishedClaim("CNOT attack, X check: (3/4)|a-b|^2", 0.75 * abs(a - b) ** 2)
    p = spec.p
    if basis == "Z":
        return PublishedClaim("entangle-measure, Z check: (1/2)(|p01|^2+|p10|^2)",
                          float(0.5 * (abs(p[0, 1]) ** 2 + abs(p[1, 0]) ** 2)))
    return PublishedClaim("entangle-measure, X check: (1/4)(|p00|^2+|p01|^2+|p10|^2+|p11|^2)",
                      0.25 * float(np.sum(np.abs(p) ** 2)))


@dataclass(frozen=True)
class DetectionReport:
    exact_probability: float
    mc_estimate: float
    mc_std_error: float
    trials: int
    check_basis: str
    claim: PublishedClaim | None = None

    @property
    def sigma_distance(self) -> float:
        se = self.mc_std_error
        if se == 0:
            p = self.exact_probability
            se = math.sqrt(p * (1 - p) / self.trials)
        diff = abs(self.mc_estimate - self.exact_probability)
        if se == 0:
            return 0.0 if diff < 1e-12 else math.inf
        return diff / se

    @property
    def consistent(self) -> bool:
        return self.sigma_distance <= 4.0

    @property
    def claim_agrees(self) -> bool | None:
        if self.claim is None:
            return None
        return abs(self.claim.value - self.exact_probability) < 1e-9

    def to_dict(self) -> dict:
        return {
            "check_basis": self.check_basis,
            "exact": {"value": self.exact_probability, "method": "exact"},
            "monte_carlo": {
                "value": self.mc_estimate,
                "method": "monte_carlo",
                "trials": self.trials,
                "std_error": self.mc_std_error,
                "sigma_distance": self.sigma_distance,
                "consistent": self.consistent,
            },
            "claim": self.claim.to_dict() if self.claim else None,
            "claim_agrees": self.claim_agrees,
        }


class _RowSource:
    """Feeds one pre-drawn row of uniforms to code expecting ``rng.random()``."""

    __slots__ = ("row", "k")

    def __init__(self, row):
        self.row = row
        self.k = 0

    def random(self) -> float:
        v = self.row[self.k]
        self.k += 1
        return v


def _draws_per_trial(spec: AttackSpec) -> int:
    per_target = 2 if spec.kind is AttackKind.INTERCEPT_RESEND else 0
    return per_target * len(spec.targets) + 2


_CHECK_PARTIES = (QubitLabel("a", 1), QubitLabel("b", 1), QubitLabel("c", 1))


def simulate_check_round(spec: AttackSpec, check_basis, rng, fresh: StateVector | None = None) -> bool:
    """One sampled attacked check round; True when the round is flagged invalid."""
    state = apply_attack(fresh if fresh is not None else channel_state_p(1), spec, rng)
    basis = check_basis
    if basis == "random":
        basis = "Z" if rng.random() < 0.5 else "X"
    m = qs.measure(state, _CHECK_PARTIES, basis, rng)
    o = m.outcome
    return not check_valid(basis, o[0], o[1], o[2])


def estimate_detection(spec: AttackSpec, check_basis="Z", trials: int = 10_000, seed=0) -> DetectionReport:
    """Monte-Carlo detection rate alongside the exact value.

    Trial ``i`` consumes row ``i`` of a uniform matrix drawn from ``seed``, so
    any split of the trials across workers reproduces the same estimate.
    """
    if trials < 1:
        raise InvalidSpec("trials must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    uniforms = rng.random((trials, _draws_per_trial(spec))).tolist()
    fresh = channel_state_p(1)
    hits = 0
    for row in uniforms:
        hits += simulate_check_round(spec, check_basis, _RowSource(row), fresh)
    est = hits / trials
    se = math.sqrt(est * (1.0 - est) / trials)
    return DetectionReport(
        detection_probability_exact(spec, check_basis), est, se, trials,
        check_basis if check_basis == "random" else qs.Basis.parse(check_basis).value,
        published_claim(spec, check_basis),
    )


def posterior_over_secrets(disclosure) -> dict[str, dict[str, float]]:
    """Posterior over the four secrets given the publicly announced bits.

    Every branch of every secret is enumerated with its exact weight, bucketed
    by the disclosed classical information, and Bayes' rule applied under a
    uniform prior.  Bucket keys are Alice's two bits, followed by Charlie's bit
    when that is disclosed too.
    """
    disclosure = Disclosure(disclosure)
    joint: dict[str, dict[str, float]] = {}
    for br in all_branches():
        if br.probability <= 0:
            continue
        key = br.alice_bits
        if disclosure is Disclosure.ALICE_AND_CHARLIE_BITS:
            key += str(br.charlie_bit)
        bucket = joint.setdefault(key, {s: 0.0 for s in SECRETS})
        bucket[br.secret] += 0.25 * br.probability
    out = {}
    for key in sorted(joint):
        total = sum(joint[key].values())
        out[key] = {s: v / total for s, v in joint[key].items()}
    return out

"""Three-party controlled direct communication over GHZ-like triples.

Alice prepares 2N channel triples, keeps the A sequence and sends B to Bob
and C to Charlie.  Consecutive triples form a group.  Check groups are
measured in a random Z or X basis to estimate the error rate; each message
group carries two secret bits via a Pauli on Alice's first qubit.  Charlie
(Hadamard then Bell measurement) and Alice (Bell measurement) each announce
classical bits, and Bob corrects and Bell-measures his pair to decode.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from . import qstate as qs
from .channels import channel_state_p, triple_labels
from .qstate import BellOutcome, QubitLabel, StateVector

if TYPE_CHECKING:
    from .adversary import AttackSpec


class ProtocolError(RuntimeError):
    pass


class InvalidConfig(ProtocolError, ValueError):
    pass


class InvalidMessage(ProtocolError, ValueError):
    pass


class WrongPhase(ProtocolError):
    pass


class GroupReused(ProtocolError):
    pass


class ProtocolAborted(ProtocolError):
    """The security check exceeded the error threshold."""

    def __init__(self, message: str, transcript: "Transcript"):
        super().__init__(message)
        self.transcript = transcript


class Phase(str, enum.Enum):
    PREPARED = "prepared"
    CHECKED = "checked"
    COMMUNICATING = "communicating"
    DONE = "done"
    ABORTED = "aborted"


_PHASE_ORDER = {Phase.PREPARED: 0, Phase.CHECKED: 1, Phase.COMMUNICATING: 2, Phase.DONE: 3, Phase.ABORTED: 3}

# Table 2 encoding: secret bits -> Pauli on Alice's first qubit of the group.
ENCODING = {"00": qs.I2, "01": qs.X, "10": qs.IY, "11": qs.Z}
ENCODING_NAMES = {"00": "I", "01": "sigma_x", "10": "i*sigma_y", "11": "sigma_z"}

SECRETS = ("00", "01", "10", "11")


def alice_bits(outcome: BellOutcome) -> str:
    """Phi+ -> 00, Psi+ -> 01, Phi- -> 10, Psi- -> 11."""
    return f"{outcome.phase}{outcome.letter}"


def charlie_bit(outcome: BellOutcome) -> int:
    """0 for Phi- or Psi+, 1 for Phi+ or Psi-."""
    return 1 - (outcome.phase ^ outcome.letter)


def correction_bit(a_bits: str, c_bit: int) -> int:
    return int(a_bits[0]) ^ c_bit


def decode_lookup(alice_bell, bob_bell) -> str:
    """Recover the two secret bits from Alice's and Bob's Bell outcomes.

    The first bit is the XOR of the two phase signs, the second the XOR of
    the phi/psi letters.
    """
    a = BellOutcome.parse(alice_bell)
    b = BellOutcome.parse(bob_bell)
    return f"{a.phase ^ b.phase}{a.letter ^ b.letter}"


_F, _f = BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS
_S, _s = BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS

# The 32 printed rows: (alice, charlie outcomes, A-to-B bits, C-to-B bit,
#                       Bob's operation, Bob's result, secret)
TABLE3_ROWS = tuple(
    (alice, (_f, _S) if cb == 0 else (_F, _s), alice_bits(alice), cb, op, bob, secret)
    for secret, block in (
        ("00", (_F, _F, _S, _S, _f, _f, _s, _s)),
        ("01", (_S, _S, _F, _F, _s, _s, _f, _f)),
        ("10", (_f, _f, _s, _s, _F, _F, _S, _S)),
        ("11", (_s, _s, _f, _f, _S, _S, _F, _F)),
    )
    for (alice, cb, op), bob in zip(
        (
            (_F, 0, "I"), (_F, 1, "X"), (_S, 0, "I"), (_S, 1, "X"),
            (_f, 0, "X"), (_f, 1, "I"), (_s, 0, "X"), (_s, 1, "I"),
        ),
        block,
    )
)


@dataclass(frozen=True)
class SessionConfig:
    n_message_groups: int = 1
    check_fraction: float = 0.5
    error_threshold: float = 0.0
    seed: int = 7
    # which of Charlie's qubits receive the Hadamard: "first" or "both"
    charlie_hadamard: str = "first"
    bob_correction_target: str = "b1"

    def __post_init__(self):
        if not isinstance(self.n_message_groups, int) or self.n_message_groups < 1:
            raise InvalidConfig("n_message_groups must be an integer >= 1")
        if not 0.0 < self.check_fraction < 1.0:
            raise InvalidConfig("check_fraction must lie in (0, 1)")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise InvalidConfig("error_threshold must lie in [0, 1]")
        if self.charlie_hadamard not in ("first", "both"):
            raise InvalidConfig("charlie_hadamard must be 'first' or 'both'")
        if self.bob_correction_target not in ("b1", "b2"):
            raise InvalidConfig("bob_correction_target must be 'b1' or 'b2'")

    @property
    def n_check_groups(self) -> int:
        f = self.check_fraction
        return max(1, math.ceil(self.n_message_groups * f / (1.0 - f) - 1e-9))

    @property
    def n_groups(self) -> int:
        return self.n_message_groups + self.n_check_groups

    @property
    def n_triples(self) -> int:
        return 2 * self.n_groups

    def to_dict(self) -> dict:
        return {
            "n_message_groups": self.n_message_groups,
            "n_check_groups": self.n_check_groups,
            "check_fraction": self.check_fraction,
            "error_threshold": self.error_threshold,
            "seed": self.seed,
            "charlie_hadamard": self.charlie_hadamard,
            "bob_correction_target": self.bob_correction_target,
        }


@dataclass
class GroupRecord:
    group_id: int
    triples: tuple[int, int]
    role: str
    register: StateVector
    stage: str = "fresh"
    secret: str | None = None
    charlie_bell: BellOutcome | None = None
    alice_bell: BellOutcome | None = None

    def qubit(self, seq: str, k: int) -> QubitLabel:
        """``qubit("a", 1)`` is Alice's qubit from the group's first triple."""
        return QubitLabel(seq, self.triples[k - 1])


@dataclass
class SessionState:
    config: SessionConfig
    groups: list[GroupRecord]
    phase: Phase = Phase.PREPARED
    attack: "AttackSpec | None" = None

    def advance(self, phase: Phase) -> None:
        if _PHASE_ORDER[phase] < _PHASE_ORDER[self.phase] or self.phase in (Phase.DONE, Phase.ABORTED):
            raise WrongPhase(f"cannot move from {self.phase.value} to {phase.value}")
        self.phase = phase

    def group(self, group_id: int) -> GroupRecord:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise KeyError(f"no group {group_id}")

    @property
    def message_groups(self) -> list[GroupRecord]:
        return [g for g in self.groups if g.role == "message"]

    @property
    def check_groups(self) -> list[GroupRecord]:
        return [g for g in self.groups if g.role == "check"]


@dataclass(frozen=True)
class CheckRound:
    group_id: int
    triple: int
    basis: str
    alice: str
    bob: str
    charlie: str
    valid: bool

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "triple": self.triple,
            "basis": self.basis,
            "alice": self.alice,
            "bob": self.bob,
            "charlie": self.charlie,
            "valid": self.valid,
        }


@dataclass(frozen=True)
class CheckReport:
    rounds: tuple[CheckRound, ...]
    error_rate: float
    threshold: float
    passed: bool

    def to_dict(self, include_rounds: bool = True) -> dict:
        d = {
            "n_rounds": len(self.rounds),
            "n_invalid": sum(not r.valid for r in self.rounds),
            "error_rate": self.error_rate,
            "threshold": self.threshold,
            "passed": self.passed,
        }
        if include_rounds:
            d["rounds"] = [r.to_dict() for r in self.rounds]
        return d


def check_valid(basis, alice: str, bob: str, charlie: str) -> bool:
    """Security-check correlation: odd Z parity, or three equal X signs."""
    basis = qs.Basis.parse(basis)
    if basis is qs.Basis.Z:
        return (int(alice) + int(bob) + int(charlie)) % 2 == 1
    if basis is qs.Basis.X:
        return alice == bob == charlie
    raise ValueError("security checks use the Z or X basis")


@dataclass(frozen=True)
class RoundRecord:
    group_id: int
    qubits: tuple[str, ...]
    secret_in: str
    encoding: str
    charlie_bell: BellOutcome
    charlie_bit: int
    alice_bell: BellOutcome
    alice_bits: str
    bob_correction: str
    bob_bell: BellOutcome
    secret_out: str

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "qubits": list(self.qubits),
            "secret_in": self.secret_in,
            "encoding": self.encoding,
            "charlie_bell": self.charlie_bell.value,
            "charlie_bit": self.charlie_bit,
            "alice_bell": self.alice_bell.value,
            "alice_bits": self.alice_bits,
            "bob_correction": self.bob_correction,
            "bob_bell": self.bob_bell.value,
            "secret_out": self.secret_out,
        }


@dataclass
class Transcript:
    config: SessionConfig
    message: str
    check: CheckReport | None = None
    rounds: list[RoundRecord] = field(default_factory=list)
    aborted: bool = False
    attack: dict | None = None

    @property
    def complete(self) -> bool:
        return (not self.aborted and self.check is not None
                and len(self.rounds) == self.config.n_message_groups)

    @property
    def recovered(self) -> str:
        return "".join(r.secret_out for r in self.rounds)

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "recovered": self.recovered,
            "success": self.complete and self.recovered == self.message,
            "aborted": self.aborted,
            "attack": self.attack,
            "security_check": self.check.to_dict() if self.check else None,
            "rounds": [r.to_dict() for r in self.rounds],
        }


def prepare(config: SessionConfig, rng, attack: "AttackSpec | None" = None) -> SessionState:
    """Prepare 2N channel triples, pair them into groups and pick check groups.

    If ``attack`` is given it is applied to every triple while the B and C
    sequences are in transit.
    """
    if not isinstance(config, SessionConfig):
        raise InvalidConfig("config must be a SessionConfig")
    n = config.n_groups
    order = np.argsort([rng.random() for _ in range(n)], kind="stable")
    check_ids = {int(i) + 1 for i in order[: config.n_check_groups]}
    groups = []
    for g in range(1, n + 1):
        i, j = 2 * g - 1, 2 * g
        t1, t2 = channel_state_p(i), channel_state_p(j)
        if attack is not None:
            from .adversary import apply_attack

            t1 = apply_attack(t1, attack, rng)
            t2 = apply_attack(t2, attack, rng)
        role = "check" if g in check_ids else "message"
        groups.append(GroupRecord(g, (i, j), role, qs.tensor(t1, t2)))
    return SessionState(config, groups, Phase.PREPARED, attack)


def run_security_check(session: SessionState, rng) -> CheckReport:
    """Measure every check triple in a random common basis and score it."""
    if session.phase is not Phase.PREPARED:
        raise WrongPhase(f"security check needs phase prepared, not {session.phase.value}")
    rounds = []
    for g in session.check_groups:
        state = g.register
        for t in g.triples:
            basis = "Z" if rng.random() < 0.5 else "X"
            a, b, c = triple_labels(t)
            m = qs.measure(state, (a, b, c), basis, rng)
            state = m.state
            oa, ob, oc = m.outcome
            rounds.append(CheckRound(g.group_id, t, basis, oa, ob, oc, check_valid(basis, oa, ob, oc)))
        g.register = state
        g.stage = "checked"
    err = sum(not r.valid for r in rounds) / len(rounds)
    ok = err <= session.config.error_threshold
    session.advance(Phase.CHECKED if ok else Phase.ABORTED)
    return CheckReport(tuple(rounds), err, session.config.error_threshold, ok)


def _message_group(session: SessionState, group_id: int, stage: str) -> GroupRecord:
    if session.phase not in (Phase.CHECKED, Phase.COMMUNICATING):
        raise WrongPhase(f"communication needs a passed check, phase is {session.phase.value}")
    g = session.group(group_id)
    if g.role != "message":
        raise WrongPhase(f"group {group_id} is a check group")
    if g.stage != stage:
        raise WrongPhase(f"group {group_id} is at stage {g.stage!r}, expected {stage!r}")
    return g


def encode_secret(session: SessionState, group_id: int, secret: str) -> SessionState:
    """Apply the Pauli for ``secret`` to Alice's first qubit of the group."""
    if secret not in ENCODING:
        raise InvalidMessage(f"secret must be two bits, got {secret!r}")
    g = session.group(group_id)
    if g.role == "message" and g.stage != "fresh":
        raise GroupReused(f"group {group_id} already carries a secret")
    g = _message_group(session, group_id, "fresh")
    g.register = qs.apply_1q(g.register, ENCODING[secret], g.qubit("a", 1))
    g.secret = secret
    g.stage = "encoded"
    if session.phase is Phase.CHECKED:
        session.advance(Phase.COMMUNICATING)
    return session


def _charlie_prepare(state: StateVector, g: GroupRecord, mode: str) -> StateVector:
    state = qs.apply_1q(state, qs.H, g.qubit("c", 1))
    if mode == "both":
        state = qs.apply_1q(state, qs.H, g.qubit("c", 2))
    return state


def charlie_step(session: SessionState, group_id: int, rng) -> tuple[BellOutcome, int]:
    g = _message_group(session, group_id, "encoded")
    state = _charlie_prepare(g.register, g, session.config.charlie_hadamard)
    m = qs.measure_bell(state, (g.qubit("c", 1), g.qubit("c", 2)), rng)
    g.register = m.state
    g.charlie_bell = m.outcome
    g.stage = "charlie"
    return m.outcome, charlie_bit(m.outcome)


def alice_step(session: SessionState, group_id: int, rng) -> tuple[BellOutcome, str]:
    g = _message_group(session, group_id, "charlie")
    m = qs.measure_bell(g.register, (g.qubit("a", 1), g.qubit("a", 2)), rng)
    g.register = m.state
    g.alice_bell = m.outcome
    g.stage = "alice"
    return m.outcome, alice_bits(m.outcome)


def bob_step(session: SessionState, group_id: int, a_bits: str, c_bit: int, rng) -> tuple[BellOutcome, str]:
    g = _message_group(session, group_id, "alice")
    state = g.register
    if correction_bit(a_bits, c_bit):
        k = 1 if session.config.bob_correction_target == "b1" else 2
        state = qs.apply_1q(state, qs.X, g.qubit("b", k))
    m = qs.measure_bell(state, (g.qubit("b", 1), g.qubit("b", 2)), rng)
    g.register = m.state
    g.stage = "done"
    return m.outcome, decode_lookup(g.alice_bell, m.outcome)


def _split_message(message: str, config: SessionConfig) -> list[str]:
    if not message or len(message) % 2 or set(message) - {"0", "1"}:
        raise InvalidMessage("message must be a non-empty bit string of even length")
    if len(message) != 2 * config.n_message_groups:
        raise InvalidMessage(
            f"message of {len(message)} bits needs {len(message) // 2} message groups, "
            f"config has {config.n_message_groups}"
        )
    return [message[i:i + 2] for i in range(0, len(message), 2)]


def run_session(message: str, config: SessionConfig, rng=None, attack: "AttackSpec | None" = None) -> Transcript:
    """Run preparation, checking, encoding and decoding for every group."""
    secrets = _split_message(message, config)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    session = prepare(config, rng, attack)
    transcript = Transcript(config, message, attack=attack.to_dict() if attack is not None else None)
    transcript.check = run_security_check(session, rng)
    if not transcript.check.passed:
        transcript.aborted = True
        raise ProtocolAborted(
            f"error rate {transcript.check.error_rate:.4f} exceeds threshold {config.error_threshold}",
            transcript,
        )
    for g, secret in zip(session.message_groups, secrets):
        encode_secret(session, g.group_id, secret)
        c_bell, c_bit = charlie_step(session, g.group_id, rng)
        a_bell, a_bits = alice_step(session, g.group_id, rng)
        corr = "X" if correction_bit(a_bits, c_bit) else "I"
        b_bell, out = bob_step(session, g.group_id, a_bits, c_bit, rng)
        transcript.rounds.append(RoundRecord(
            g.group_id,
            tuple(str(x) for x in g.register.labels if x.sequence in ("a", "b", "c")),
            secret, ENCODING_NAMES[secret], c_bell, c_bit, a_bell, a_bits, corr, b_bell, out,
        ))
    session.advance(Phase.DONE)
    return transcript


@dataclass(frozen=True)
class Branch:
    """One exact measurement branch of a single message group."""

    secret: str
    charlie_bell: BellOutcome
    alice_bell: BellOutcome
    probability: float
    correction: str
    bob_distribution: dict[BellOutcome, float]
    bob_marginal_before_correction: dict[BellOutcome, float]

    @property
    def charlie_bit(self) -> int:
        return charlie_bit(self.charlie_bell)

    @property
    def alice_bits(self) -> str:
        return alice_bits(self.alice_bell)

    def decoded(self, tol: float = 1e-9) -> set[str]:
        return {decode_lookup(self.alice_bell, b) for b, p in self.bob_distribution.items() if p > tol}


def group_register(secret: str | None = None) -> tuple[StateVector, GroupRecord]:
    """A fresh two-triple group (labels a1..c2), optionally already encoded."""
    reg = qs.tensor(channel_state_p(1), channel_state_p(2))
    g = GroupRecord(1, (1, 2), "message", reg)
    if secret is not None:
        reg = qs.apply_1q(reg, ENCODING[secret], g.qubit("a", 1))
    return reg, g


def enumerate_branches(secret: str, charlie_hadamard: str = "first",
                       correction_target: str = "b1") -> list[Branch]:
    """All 16 (Charlie, Alice) outcome pairs for one encoded group, with exact weights."""
    state, g = group_register(secret)
    state = _charlie_prepare(state, g, charlie_hadamard)
    c_pair = (g.qubit("c", 1), g.qubit("c", 2))
    a_pair = (g.qubit("a", 1), g.qubit("a", 2))
    b_pair = (g.qubit("b", 1), g.qubit("b", 2))
    out = []
    for cb in qs.BELL_ORDER:
        pc, sc = qs.postselect(state, c_pair, "Bell", cb)
        for ab in qs.BELL_ORDER:
            if sc is None:
                out.append(Branch(secret, cb, ab, 0.0, "-", {}, {}))
                continue
            pa, sa = qs.postselect(sc, a_pair, "Bell", ab)
            if sa is None:
                out.append(Branch(secret, cb, ab, 0.0, "-", {}, {}))
                continue
            before = qs.outcome_distribution(sa, b_pair, "Bell")
            corr = correction_bit(alice_bits(ab), charlie_bit(cb))
            sb = sa
            if corr:
                sb = qs.apply_1q(sa, qs.X, g.qubit("b", 1 if correction_target == "b1" else 2))
            dist = qs.outcome_distribution(sb, b_pair, "Bell")
            out.append(Branch(secret, cb, ab, pc * pa, "X" if corr else "I", dist, before))
    return out


def all_branches(**kw) -> list[Branch]:
    return [b for s in SECRETS for b in enumerate_branches(s, **kw)]


def bob_marginal(secret: str) -> dict[BellOutcome, float]:
    """Bob's Bell-outcome distribution on a freshly encoded group, before any announcement."""
    state, g = group_register(secret)
    state = _charlie_prepare(state, g, "first")
    return qs.outcome_distribution(state, (g.qubit("b", 1), g.qubit("b", 2)), "Bell")


def iter_table3_checks(rows: Iterable = TABLE3_ROWS) -> list[dict]:
    """Check each printed row against the closed-form decoder and the simulation."""
    branches = {(b.secret, b.charlie_bell, b.alice_bell): b for b in all_branches()}
    results = []
    for alice, charlies, a_bits, c_bit, op, bob, secret in rows:
        closed = decode_lookup(alice, bob) == secret
        bits_ok = alice_bits(alice) == a_bits and all(charlie_bit(c) == c_bit for c in charlies)
        op_ok = ("X" if correction_bit(a_bits, c_bit) else "I") == op
        sim_ok = True
        for c in charlies:
            br = branches[(secret, c, alice)]
            support = {b for b, p in br.bob_distribution.items() if p > 1e-9}
            sim_ok &= br.probability > 1e-9 and support == {bob}
        results.append({
            "alice": alice.value, "charlie": [c.value for c in charlies], "a_to_b": a_bits,
            "c_to_b": c_bit, "bob_operation": op, "bob": bob.value, "secret": secret,
            "closed_form": closed, "classical_bits": bits_ok, "operation": op_ok, "simulation": sim_ok,
        })
    return results

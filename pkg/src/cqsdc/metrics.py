"""Qubit and classical-bit accounting, and the two efficiency figures."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .protocol import Transcript


class ZeroDenominator(ZeroDivisionError):
    pass


class IncompleteTranscript(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolCost:
    m_u: int  # secret bits
    q_k: int  # qubits
    b_k: int  # classical bits
    name: str = ""

    def __post_init__(self):
        if min(self.m_u, self.q_k, self.b_k) < 0:
            raise ValueError("counts must be non-negative")

    def scaled(self, groups: int) -> "ProtocolCost":
        return ProtocolCost(self.m_u * groups, self.q_k * groups, self.b_k * groups, self.name)


@dataclass(frozen=True)
class Efficiency:
    eta1: Fraction
    eta2: Fraction

    @staticmethod
    def percent(x: Fraction) -> Decimal:
        """Percentage rounded half-up to two decimals."""
        return (Decimal(x.numerator) * 100 / Decimal(x.denominator)).quantize(
            Decimal("0.01"), rounding=ROUND_HALF_UP
        )

    @property
    def eta1_percent(self) -> Decimal:
        return self.percent(self.eta1)

    @property
    def eta2_percent(self) -> Decimal:
        return self.percent(self.eta2)


def efficiency(cost: ProtocolCost) -> Efficiency:
    """eta1 = m_u / (q_k + b_k) and eta2 = m_u / q_k as exact fractions."""
    if cost.q_k <= 0 or cost.q_k + cost.b_k <= 0:
        raise ZeroDenominator(f"{cost.name or 'cost'} has no qubits")
    return Efficiency(Fraction(cost.m_u, cost.q_k + cost.b_k), Fraction(cost.m_u, cost.q_k))


DONG = ProtocolCost(1, 4, 4, "Dong et al.")
KAO = ProtocolCost(1, 4, 4, "Kao et al.")
PROPOSED = ProtocolCost(2, 6, 3, "Proposed protocol")
TABLE4 = (DONG, KAO, PROPOSED)
# printed eta1 / eta2 percentages
TABLE4_PRINTED = {
    "Dong et al.": (Decimal("12.5"), Decimal("25")),
    "Kao et al.": (Decimal("12.5"), Decimal("25")),
    "Proposed protocol": (Decimal("22.22"), Decimal("33.33")),
}


def measured_cost(transcript: Transcript) -> tuple[ProtocolCost, ProtocolCost]:
    """(total, per-group) cost counted from a completed transcript.

    Only message groups count; check-group qubits are excluded.
    """
    if not transcript.complete:
        raise IncompleteTranscript("transcript is aborted or missing rounds")
    m = q = b = 0
    for r in transcript.rounds:
        m += len(r.secret_out)
        q += len(r.qubits)
        b += len(r.alice_bits) + 1
    n = len(transcript.rounds)
    total = ProtocolCost(m, q, b, "measured")
    if m % n or q % n or b % n:
        raise IncompleteTranscript("groups have unequal costs")
    return total, ProtocolCost(m // n, q // n, b // n, "measured per group")


def table4_rows() -> list[dict]:
    rows = []
    for c in TABLE4:
        e = efficiency(c)
        p1, p2 = TABLE4_PRINTED[c.name]
        rows.append({
            "protocol": c.name, "m_u": c.m_u, "q_k": c.q_k, "b_k": c.b_k,
            "eta1_percent": str(e.eta1_percent), "eta2_percent": str(e.eta2_percent),
            "printed_eta1": str(p1), "printed_eta2": str(p2),
            "matches": e.eta1_percent == p1 and e.eta2_percent == p2,
        })
    return rows

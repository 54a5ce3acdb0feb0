"""Pure numpy statevector kernels.

Every kernel takes a flat complex128 amplitude array for ``n`` qubits and
returns a fresh array; inputs are never written to.  Qubit position 0 is
the most significant bit of the basis index.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def apply_1q(psi: np.ndarray, n: int, pos: int, gate: np.ndarray) -> np.ndarray:
    t = psi.reshape(1 << pos, 2, 1 << (n - 1 - pos))
    return np.einsum("ij,ajb->aib", gate, t).reshape(-1)


def apply_2q(psi: np.ndarray, n: int, p1: int, p2: int, gate: np.ndarray) -> np.ndarray:
    t = psi.reshape([2] * n)
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, t, axes=([2, 3], [p1, p2]))
    return np.moveaxis(out, [0, 1], [p1, p2]).reshape(-1)


def apply_cnot(psi: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    t = psi.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[control] = 1
    sub = t[tuple(idx)]
    # target axis shifts left by one once the control axis is removed
    axis = target - 1 if target > control else target
    t[tuple(idx)] = np.flip(sub, axis=axis)
    return t.reshape(-1)


def marginal(psi: np.ndarray, n: int, positions) -> np.ndarray:
    positions = list(positions)
    p = (psi.real ** 2 + psi.imag ** 2).reshape([2] * n)
    rest = [q for q in range(n) if q not in positions]
    p = np.transpose(p, positions + rest).reshape(1 << len(positions), -1)
    return p.sum(axis=1)


def project(psi: np.ndarray, n: int, positions, outcome: int) -> np.ndarray:
    positions = list(positions)
    k = len(positions)
    idx = np.arange(psi.shape[0])
    local = np.zeros_like(idx)
    for j, q in enumerate(positions):
        local |= ((idx >> (n - 1 - q)) & 1) << (k - 1 - j)
    return np.where(local == outcome, psi, 0.0).astype(np.complex128)


def norm2(psi: np.ndarray) -> float:
    return float(np.vdot(psi, psi).real)


def kron(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.outer(left, right).reshape(-1)


def sample(probs: np.ndarray, u: float, dust: float = 1e-12) -> int:
    """Index drawn by inverse CDF with uniform ``u``; entries below ``dust`` are skipped."""
    p = np.where(probs < dust, 0.0, probs)
    c = np.cumsum(p)
    i = int(np.searchsorted(c, u * c[-1], side="right"))
    return min(i, probs.shape[0] - 1)

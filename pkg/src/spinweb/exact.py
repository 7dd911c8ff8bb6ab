"""Dense diagonalization of few-site transverse-field Ising chains.

These are the oracles that back the decimation rules: a strong bond between
two sites produces a low doublet split by twice the effective field, and a
strong field on the middle site of a three-site chain leaves an effective
bond between its neighbors.  System sizes are tiny (4x4 and 8x8 matrices),
so plain dense eigensolves are exact for all practical purposes.
"""

from __future__ import annotations

import numpy as np

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _site_op(op: np.ndarray, pos: int, n: int) -> np.ndarray:
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, op if k == pos else np.eye(2))
    return out


def chain_hamiltonian(couplings, fields) -> np.ndarray:
    """H = -sum_k J_k sx_k sx_{k+1} - sum_i h_i sz_i for an open chain."""
    n = len(fields)
    if len(couplings) != n - 1:
        raise ValueError("an open n-site chain has n-1 couplings")
    H = np.zeros((2 ** n, 2 ** n))
    for k, J in enumerate(couplings):
        H -= J * (_site_op(_SX, k, n) @ _site_op(_SX, k + 1, n))
    for i, h in enumerate(fields):
        H -= h * _site_op(_SZ, i, n)
    return H


def two_site_doublet_splitting(J: float, h1: float, h2: float) -> float:
    """Exact gap between the two lowest levels of a strongly bonded pair."""
    E = np.linalg.eigvalsh(chain_hamiltonian([J], [h1, h2]))
    return E[1] - E[0]


def three_site_effective_coupling(J_ji: float, J_ik: float, h_i: float) -> float:
    """Effective bond between the outer sites of a j-i-k chain, h_j = h_k = 0.

    With the outer fields absent the 8x8 Hamiltonian splits into degenerate
    doublets; the lowest four levels come in two pairs whose separation is
    twice the effective coupling, so (E2 + E3 - E0 - E1) / 4 recovers it.
    """
    E = np.linalg.eigvalsh(chain_hamiltonian([J_ji, J_ik], [0.0, h_i, 0.0]))
    return (E[2] + E[3] - E[0] - E[1]) / 4.0

"""Single-qubit Pauli transfer matrices and process (chi) matrices.

Pauli order is I, X, Y, Z throughout, labelled by bit pairs
(0,0), (1,0), (1,1), (0,1).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LABELS = ("I", "X", "Y", "Z")
BITS = ((0, 0), (1, 0), (1, 1), (0, 1))

PAULIS = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

DEFAULT_CPTP_TOL = 1e-7


def pauli_index(a) -> int:
    """Row index for a Pauli given as label, bit pair or index."""
    if isinstance(a, str):
        return LABELS.index(a.upper())
    if isinstance(a, (tuple, list, np.ndarray)) and len(a) == 2:
        return BITS.index((int(a[0]) % 2, int(a[1]) % 2))
    i = int(a)
    if not 0 <= i < 4:
        raise ValueError(f"Pauli index out of range: {a}")
    return i


def pauli_bits(a) -> tuple:
    return BITS[pauli_index(a)]


def symplectic_product(p, q) -> int:
    """1 if the Paulis with bit labels p and q anticommute, else 0."""
    return (p[0] * q[1] + p[1] * q[0]) % 2


# _SIGNS[p, q] = +-1: sign picked up by Pauli q under conjugation by Pauli p
_SIGNS = np.array([[1 - 2 * symplectic_product(p, q) for q in BITS] for p in BITS], dtype=float)


def correction_ptm(p) -> np.ndarray:
    """PTM of conjugation by Pauli p: diagonal with -1 on anticommuting rows."""
    return np.diag(_SIGNS[pauli_index(p)])


def correction_signs() -> np.ndarray:
    """4x4 table of conjugation signs, rows indexed by the applied Pauli."""
    return _SIGNS.copy()


@dataclass
class PTM:
    """Real 4x4 Pauli transfer matrix with optional provenance metadata."""

    gamma: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float).reshape(4, 4)
        if not np.all(np.isfinite(self.gamma)):
            raise ValueError("PTM entries must be finite")

    def __array__(self, dtype=None, copy=None):
        return self.gamma if dtype is None else self.gamma.astype(dtype)

    def to_json(self) -> str:
        return ptm_to_json(self.gamma, self.meta)

    def to_csv(self) -> str:
        return ptm_to_csv(self.gamma)


@dataclass
class ChiMatrix:
    """Hermitian 4x4 process matrix in the Pauli operator basis."""

    chi: np.ndarray

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=complex).reshape(4, 4)


def _ptm_basis() -> np.ndarray:
    # T[i, j, m, n] = 1/2 Tr[s_i s_m s_j s_n^dag]
    return 0.5 * np.einsum("iab,mbc,jcd,nda->ijmn", PAULIS, PAULIS, PAULIS,
                           PAULIS.conj().transpose(0, 2, 1))


_T = _ptm_basis()
_T_FLAT = _T.reshape(16, 16)
_T_INV = np.linalg.inv(_T_FLAT)


def chi_to_ptm(chi) -> np.ndarray:
    chi = np.asarray(chi.chi if isinstance(chi, ChiMatrix) else chi, dtype=complex)
    return (_T_FLAT @ chi.reshape(16)).reshape(4, 4).real


def ptm_to_chi(gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=complex)
    chi = (_T_INV @ g.reshape(16)).reshape(4, 4)
    return 0.5 * (chi + chi.conj().T)


def chi_ptm_convert(x):
    """Convert between representations: PTM -> ChiMatrix, ChiMatrix -> PTM."""
    if isinstance(x, ChiMatrix):
        return PTM(chi_to_ptm(x.chi))
    if isinstance(x, PTM):
        return ChiMatrix(ptm_to_chi(x.gamma))
    raise TypeError("expected PTM or ChiMatrix")


def pauli_channel_ptm(probs: Sequence[float]) -> np.ndarray:
    """Diagonal PTM of the Pauli channel with probabilities (p_I, p_X, p_Y, p_Z)."""
    pI, pX, pY, pZ = probs
    return np.diag([pI + pX + pY + pZ, pI + pX - pY - pZ, pI - pX + pY - pZ, pI - pX - pY + pZ])


def pauli_probabilities(gamma) -> np.ndarray:
    """Diagonal of the process matrix, (p_I, p_X, p_Y, p_Z)."""
    return np.real(np.diag(ptm_to_chi(np.asarray(gamma))))


def ptm_from_kraus_coeffs(kraus_pauli_coeffs) -> np.ndarray:
    """PTM of sum_n K_n . K_n^dag, each K_n = sum_a c[n, a] sigma_a."""
    coeffs = np.asarray(kraus_pauli_coeffs, dtype=complex)
    if coeffs.size == 0:
        raise ValueError("at least one Kraus operator is required")
    coeffs = coeffs.reshape(-1, 4)
    chi = np.einsum("nm,nk->mk", coeffs, coeffs.conj())
    return chi_to_ptm(chi)


def compose(a, b) -> np.ndarray:
    """PTM of applying b first, then a."""
    return np.asarray(a, dtype=float) @ np.asarray(b, dtype=float)


def blocks(g) -> dict:
    g = np.asarray(g, dtype=float)
    return {
        "survival": float(g[0, 0]),
        "nonunital": g[1:, 0].copy(),
        "leakage": g[0, 1:].copy(),
        "unital_block": g[1:, 1:].copy(),
    }


@dataclass
class CptpReport:
    ok: bool
    violations: list
    chi_eigenvalues: np.ndarray

    def __bool__(self):
        return self.ok


def is_cptp(g, tol: float = DEFAULT_CPTP_TOL) -> CptpReport:
    """Check trace preservation (first row) and complete positivity (chi spectrum)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = np.asarray(g, dtype=float)
    violations = []
    tp_dev = np.abs(g[0] - np.array([1.0, 0.0, 0.0, 0.0])).max()
    if tp_dev > tol:
        violations.append({"kind": "TP", "magnitude": float(tp_dev)})
    ev = np.linalg.eigvalsh(ptm_to_chi(g))
    if ev[0] < -tol:
        violations.append({"kind": "CP", "magnitude": float(-ev[0])})
    return CptpReport(not violations, violations, ev)


def avg_gate_fidelity(g) -> float:
    """Average gate fidelity (Tr Gamma + d) / (d (d + 1)) for a qubit."""
    return float((np.trace(np.asarray(g, dtype=float)) + 2.0) / 6.0)


def ptm_to_json(g, meta: dict | None = None) -> str:
    payload = {"order": "IXYZ", "gamma": [float(x) for x in np.asarray(g, dtype=float).ravel()]}
    if meta:
        payload["meta"] = meta
    return json.dumps(payload, indent=2, sort_keys=True)


def ptm_from_json(text: str) -> np.ndarray:
    payload = json.loads(text)
    if payload.get("order") != "IXYZ":
        raise ValueError("unsupported Pauli order")
    return np.array(payload["gamma"], dtype=float).reshape(4, 4)


def ptm_to_csv(g) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row"] + list(LABELS))
    for lab, row in zip(LABELS, np.asarray(g, dtype=float)):
        w.writerow([lab] + [repr(float(x)) for x in row])
    return buf.getvalue()


def ptm_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    return np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)

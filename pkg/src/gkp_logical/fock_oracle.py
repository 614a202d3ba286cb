"""Brute-force truncated Fock-space reference for damped GKP states.

Everything here is deliberately independent of the theta-function path: codewords
are built from Hermite functions evaluated on the position comb, displacements
come from a matrix exponential on a padded space, and Wigner functions from the
displaced-parity expectation evaluated in the position representation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CutoffError
from .qubit_channels import BITS, LABELS, PAULIS, pauli_bits

SQRT_PI = np.sqrt(np.pi)
SHIFT = np.sqrt(np.pi / 2)


@dataclass(frozen=True)
class FockConfig:
    n_max: int = 120
    peak_range: int = 8
    pad: int = 80
    tail_tol: float = 1e-10


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalised oscillator eigenfunctions psi_n(x), shape (len(x), n_max)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((x.size, n_max))
    out[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(2, n_max):
        out[:, n] = np.sqrt(2.0 / n) * x * out[:, n - 1] - np.sqrt((n - 1) / n) * out[:, n - 2]
    return out


def _raw_codeword(beta: float, j: int, n_max: int, peak_range: int) -> np.ndarray:
    s = (2 * np.arange(-peak_range, peak_range + 1) + j) * SQRT_PI
    return np.exp(-beta * np.arange(n_max)) * hermite_functions(n_max, s).sum(axis=0)


def build_damped_codeword(beta: float, j: int, cfg: FockConfig = FockConfig()) -> np.ndarray:
    """Unnormalised Fock vector of exp(-beta n) applied to the position comb of codeword j.

    Raises CutoffError when the weight beyond n_max (estimated from a doubled
    cutoff) or the change from two extra comb peaks exceeds cfg.tail_tol.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    v = _raw_codeword(beta, j, cfg.n_max, cfg.peak_range)
    big = _raw_codeword(beta, j, 2 * cfg.n_max, cfg.peak_range)
    norm2 = float(big @ big)
    tail = float(big[cfg.n_max:] @ big[cfg.n_max:]) / norm2
    wider = _raw_codeword(beta, j, cfg.n_max, cfg.peak_range + 2)
    peak_dev = float(np.abs(wider - v).max() / np.abs(v).max())
    if tail > cfg.tail_tol or peak_dev > cfg.tail_tol:
        raise CutoffError(
            f"Fock truncation too small at beta={beta}: tail population {tail:.2e}, "
            f"peak-range change {peak_dev:.2e}; raise n_max or peak_range")
    return v


def _expm_block(alpha: complex, dim: int, n_max: int) -> np.ndarray:
    """exp(alpha a^dag - conj(alpha) a) on dim levels, sliced to n_max.

    With alpha = r e^{i theta} the generator is U S^dag (i r X) S U^dag, where
    X = a + a^dag is real symmetric tridiagonal, U = diag(e^{i n theta}) and
    S = diag(i^n); the exponential follows from the eigenpairs of X.
    """
    if alpha == 0:
        return np.eye(n_max, dtype=complex)
    r, theta = abs(alpha), np.angle(alpha)
    lam, Q = eigh_tridiagonal(np.zeros(dim), np.sqrt(np.arange(1, dim)))
    Qn = Q[:n_max]
    inner = (Qn * np.exp(1j * r * lam)) @ Qn.T
    n = np.arange(n_max)
    ph = np.exp(1j * n * (theta - np.pi / 2))
    return ph[:, None] * inner * ph.conj()[None, :]


def displacement_matrix(alpha: complex, n_max: int, pad: int = 80, tol: float = 1e-10) -> np.ndarray:
    """exp(alpha a^dag - conj(alpha) a) on the first n_max Fock states.

    The exponential is taken on a space enlarged by pad levels and sliced. The
    kept block is compared with a second exponential padded twice as far; a
    difference above tol means the padding truncates the displacement.
    """
    D = _expm_block(alpha, n_max + pad, n_max)
    ref = _expm_block(alpha, n_max + 2 * pad, n_max)
    defect = float(np.abs(D - ref).max())
    if defect > tol:
        raise CutoffError(f"displacement |alpha|={abs(alpha):.3g} not resolved with n_max={n_max}, "
                          f"pad={pad}: truncation defect {defect:.2e}; increase pad")
    return D


def oracle_damped_element(beta: float, gamma: complex, j: int, k: int, cfg: FockConfig = FockConfig(),
                          codewords: tuple | None = None) -> complex:
    """v_j^dag D(gamma) v_k with damped codeword vectors."""
    v = codewords or (build_damped_codeword(beta, 0, cfg), build_damped_codeword(beta, 1, cfg))
    D = displacement_matrix(gamma, cfg.n_max, cfg.pad)
    return complex(v[j].conj() @ D @ v[k])


def oracle_ratio_check(beta: float, gammas, cfg: FockConfig = FockConfig()) -> dict:
    """Compare element ratios against the theta path over a set of displacements."""
    from .lattice_theta import damped_disp_element

    v = (build_damped_codeword(beta, 0, cfg), build_damped_codeword(beta, 1, cfg))
    ref_o = float(v[0] @ v[0])
    ref_t = damped_disp_element(beta, 0.0, 0, 0).real
    worst = 0.0
    for g in np.ravel(gammas):
        D = displacement_matrix(complex(g), cfg.n_max, cfg.pad)
        for j in (0, 1):
            for k in (0, 1):
                o = (v[j].conj() @ D @ v[k]) / ref_o
                t = damped_disp_element(beta, complex(g), j, k) / ref_t
                worst = max(worst, abs(o - t))
    return {"beta": beta, "n_max": cfg.n_max, "grid": [complex(g) for g in np.ravel(gammas)],
            "max_rel_dev": float(worst)}


def logical_pauli_operator(a, n_max: int, pad: int = 80) -> np.ndarray:
    """Displacement realising logical Pauli a on the square code (Y = i X Z)."""
    b = pauli_bits(a)
    if b == (0, 0):
        return np.eye(n_max, dtype=complex)
    if b == (1, 1):
        X = displacement_matrix(SHIFT, n_max + pad, pad)
        Z = displacement_matrix(1j * SHIFT, n_max + pad, pad)
        return (1j * X @ Z)[:n_max, :n_max]
    return displacement_matrix(SHIFT * (b[0] + 1j * b[1]), n_max, pad)


def validate_sign_rule(cfg: FockConfig = FockConfig(n_max=80, peak_range=6), sign_fn=None,
                       beta: float = 0.3) -> dict:
    """Check P_b^dag sigma_a' P_b = sign(a', b) sigma_a' on damped codewords for all 16 pairs.

    The sign is read off from the ratio of code-space matrix elements of the
    conjugated and bare operators.
    """
    if sign_fn is None:
        from .ptd_channel import sign_rule as sign_fn
    big = cfg.n_max + 2 * cfg.pad
    v = [np.zeros(big, dtype=complex) for _ in (0, 1)]
    for j in (0, 1):
        v[j][:cfg.n_max] = build_damped_codeword(beta, j, cfg)
    outcomes = []
    ok = True
    sigmas = [logical_pauli_operator(ai, big, cfg.pad) for ai in range(4)]
    for b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        P = displacement_matrix(SHIFT * (b[0] + 1j * b[1]), big, cfg.pad)
        for ai, sigma in enumerate(sigmas):
            conj = P.conj().T @ sigma @ P
            best = None
            for j in (0, 1):
                for k in (0, 1):
                    bare = v[j].conj() @ sigma @ v[k]
                    if best is None or abs(bare) > abs(best[0]):
                        best = (bare, v[j].conj() @ conj @ v[k])
            ratio = best[1] / best[0]
            measured = int(np.rint(ratio.real))
            expected = int(sign_fn(BITS[ai], b))
            match = measured == expected and abs(ratio - measured) < 1e-6
            ok &= match
            outcomes.append({"a_prime": LABELS[ai], "b": list(b), "measured": measured,
                             "expected": expected, "ratio_error": float(abs(ratio - measured)),
                             "match": bool(match)})
    return {"ok": bool(ok), "outcomes": outcomes}


def twirled_density_matrix(beta: float, j: int = 0, cfg: FockConfig = FockConfig()) -> np.ndarray:
    """Normalised mixture over the four shifted envelopes of codeword j."""
    big = cfg.n_max + cfg.pad
    rho = np.zeros((cfg.n_max, cfg.n_max), dtype=complex)
    v = [np.zeros(big) for _ in (0, 1)]
    for jj in (0, 1):
        v[jj][:cfg.n_max] = build_damped_codeword(beta, jj, cfg)
    for b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        D = displacement_matrix(SHIFT * (b[0] + 1j * b[1]), big, cfg.pad)
        u = (D @ v[(j + b[0]) % 2])[:cfg.n_max]
        rho += np.outer(u, u.conj())
    return rho / np.trace(rho).real


def pure_density_matrix(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj()) / float(np.vdot(vec, vec).real)


@dataclass
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray
    meta: dict


def _wigner_position(rho: np.ndarray, q: np.ndarray, p: np.ndarray, dy: float = 0.025) -> np.ndarray:
    """W(q, p) = (1/pi) Tr[rho D(alpha) Parity D(alpha)^dag], alpha = (q + i p)/sqrt(2).

    The displaced parity is evaluated in the position representation,
    W = (1/pi) int psi*(q + y) psi(q - y) exp(2 i p y) dy, for each eigenvector
    of rho. Hermite functions are stable at any cutoff, unlike the Fock-space
    Laguerre recursion, and the y sum is spectrally accurate for dy well below
    pi / (2 sqrt(2 n_max) + 2 max|p|).
    """
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    keep = w > 1e-14 * w.max()
    w, U = w[keep], U[:, keep]
    n = rho.shape[0]
    ymax = np.sqrt(2 * n + 1) + 6.0
    y = np.arange(-ymax, ymax + dy / 2, dy)
    phase = np.exp(2j * np.outer(y, p)) * dy / np.pi
    W = np.empty((q.size, p.size))
    for i, qi in enumerate(q):
        plus = hermite_functions(n, qi + y) @ U
        minus = hermite_functions(n, qi - y) @ U
        f = (plus.conj() * minus) @ w
        W[i] = (f @ phase).real
    return W


def wigner_point(rho: np.ndarray, q: float, p: float, pad: int = 80) -> float:
    """Single-point Wigner value from the displaced-parity expectation directly.

    Uses D(alpha) Parity D(alpha)^dag = D(2 alpha) Parity, so only the block of
    D(2 alpha) on the state's own levels is needed; padding is doubled until
    that block is resolved.
    """
    n = rho.shape[0]
    alpha = 2 * (q + 1j * p) / np.sqrt(2)
    for _ in range(5):
        try:
            D = displacement_matrix(alpha, n, pad)
            break
        except CutoffError:
            pad *= 2
    else:
        D = displacement_matrix(alpha, n, pad)
    parity = (-1.0) ** np.arange(n)
    return float(np.real(np.trace(rho @ (D * parity))) / np.pi)


def wigner_raster(state, q, p) -> WignerGrid:
    """Wigner function of a Fock vector or density matrix on a (q, p) grid."""
    state = np.asarray(state)
    rho = pure_density_matrix(state) if state.ndim == 1 else state
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    W = _wigner_position(rho, q, p)
    dq = q[1] - q[0] if q.size > 1 else 1.0
    dp = p[1] - p[0] if p.size > 1 else 1.0
    edge = max(np.abs(W[0]).max(), np.abs(W[-1]).max(), np.abs(W[:, 0]).max(), np.abs(W[:, -1]).max())
    meta = {"total": float(W.sum() * dq * dp), "edge_max_rel": float(edge / np.abs(W).max())}
    if meta["edge_max_rel"] > 1e-6:
        meta["warning"] = "grid does not cover the state support"
    return WignerGrid(q, p, W, meta)


def position_density(vec: np.ndarray, q) -> np.ndarray:
    """|psi(q)|^2 of a normalised Fock vector."""
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.sqrt(np.vdot(vec, vec).real)
    psi = hermite_functions(vec.size, q) @ vec
    return np.abs(psi) ** 2


def oracle_damped_trace_ratios(beta: float, cfg: FockConfig = FockConfig()) -> dict:
    """Damped Pauli traces from Fock vectors, as ratios to the identity trace."""
    v = (build_damped_codeword(beta, 0, cfg), build_damped_codeword(beta, 1, cfg))
    e = np.array([[v[j] @ v[k] for k in (0, 1)] for j in (0, 1)])
    tr = {"I": e[0, 0] + e[1, 1], "X": 2 * e[0, 1], "Y": 0.0, "Z": e[0, 0] - e[1, 1]}
    return {k: float(val / tr["I"]) for k, val in tr.items()}

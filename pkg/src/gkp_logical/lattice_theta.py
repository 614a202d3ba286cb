"""Siegel theta functions and damped-displacement matrix elements of the square GKP code.

All heavy lifting in the package reduces to the two-dimensional lattice sum

    Theta(z, tau) = sum_{n in Z^2} exp(i pi n^T tau n + 2 pi i n^T z)

evaluated in an overflow-safe form: every routine returns a mantissa together
with a real log-scale so that ``value = mantissa * exp(log_scale)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

SQRT_PI = np.sqrt(np.pi)
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class DampingParams:
    """Damping strength beta of the envelope operator exp(-beta n)."""

    beta: float

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise DomainError(f"beta must be positive and finite, got {self.beta}")

    @cached_property
    def tanh(self) -> float:
        return float(np.tanh(self.beta))

    @cached_property
    def coth(self) -> float:
        return 1.0 / self.tanh

    @cached_property
    def csch(self) -> float:
        return 1.0 / np.sinh(self.beta)

    @cached_property
    def sech(self) -> float:
        return 1.0 / np.cosh(self.beta)

    @cached_property
    def tanh_half(self) -> float:
        return float(np.tanh(self.beta / 2))

    @cached_property
    def tau(self) -> np.ndarray:
        """Period matrix of the damped matrix-element theta function."""
        c = self.coth
        return np.array([[1j * c, 0.5], [0.5, 0.25j * c]])


def _as_params(beta) -> DampingParams:
    return beta if isinstance(beta, DampingParams) else DampingParams(float(beta))


@dataclass(frozen=True)
class ThetaQuery:
    """Arguments of a Siegel theta evaluation."""

    z: np.ndarray
    tau: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=complex))
        _check_tau(self.tau)
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


def _check_tau(tau: np.ndarray) -> float:
    """Validate a period matrix and return the smallest eigenvalue of Im(tau)."""
    if tau.shape != (2, 2):
        raise DomainError(f"tau must be 2x2, got shape {tau.shape}")
    scale = max(np.abs(tau).max(), 1.0)
    if abs(tau[0, 1] - tau[1, 0]) > 1e-14 * scale:
        raise DomainError("tau must be symmetric")
    lam = float(np.linalg.eigvalsh(tau.imag)[0])
    if not lam > 0:
        raise DomainError("Im(tau) must be positive definite")
    return lam


def _tail_bound(radius: int, lam: float) -> float:
    """Upper bound on the omitted mass outside a square window of half-width radius.

    Points outside the window sit at distance >= radius + 1/2 from the Gaussian
    centre along at least one axis; the bound splits the 2D sum into a product
    of 1D sums controlled by the smallest eigenvalue of Im(tau).
    """
    a = np.pi * lam
    r = radius + 0.5
    edge = 2.0 * np.exp(-a * r * r) * (1.0 + np.sqrt(np.pi / (4 * a)))
    full = 1.0 + np.sqrt(np.pi / a)
    return 2.0 * edge * full


def window_radius(lam: float, tol: float) -> int:
    """Smallest square-window half-width whose tail bound is below tol."""
    r = 0
    while _tail_bound(r, lam) > tol:
        r += 1
    return r


def _theta_direct_log(z: np.ndarray, tau: np.ndarray, tol: float, chunk: int = 4096):
    lam = _check_tau(tau)
    z = np.atleast_2d(z)
    Y = tau.imag
    X = tau.real
    nstar = -np.linalg.solve(Y, z.imag.T).T
    log_scale = np.pi * np.einsum("ni,ij,nj->n", nstar, Y, nstar)
    R = window_radius(lam, tol)
    k = np.arange(-R, R + 1)
    K = np.stack(np.meshgrid(k, k, indexing="ij"), -1).reshape(-1, 2).astype(float)
    out = np.empty(len(z), dtype=complex)
    for s in range(0, len(z), chunk):
        ns = nstar[s:s + chunk]
        c = np.rint(ns)
        n1 = c[:, 0:1] + K[None, :, 0]
        n2 = c[:, 1:2] + K[None, :, 1]
        d1 = n1 - ns[:, 0:1]
        d2 = n2 - ns[:, 1:2]
        re = -np.pi * (Y[0, 0] * d1 * d1 + 2 * Y[0, 1] * d1 * d2 + Y[1, 1] * d2 * d2)
        x = z[s:s + chunk].real
        im = np.pi * (X[0, 0] * n1 * n1 + 2 * X[0, 1] * n1 * n2 + X[1, 1] * n2 * n2)
        im += 2 * np.pi * (n1 * x[:, 0:1] + n2 * x[:, 1:2])
        out[s:s + chunk] = np.exp(re + 1j * im).sum(axis=1)
    return out, log_scale


def _sqrt_det_minus_i_tau(tau: np.ndarray) -> complex:
    # eigenvalues of -i tau have positive real part, so the principal root of
    # each factor picks the branch continuous with the real positive-definite case
    ev = np.linalg.eigvals(-1j * tau)
    return complex(np.prod(np.sqrt(ev)))


def _theta_transformed_log(z: np.ndarray, tau: np.ndarray, tol: float):
    _check_tau(tau)
    z = np.atleast_2d(z)
    if abs(np.linalg.det(tau)) < 1e-300:
        raise DomainError("tau is singular")
    tinv = np.linalg.inv(tau)
    tinv = 0.5 * (tinv + tinv.T)
    zt = z @ tinv.T
    mant, ls = _theta_direct_log(zt, -tinv, tol)
    logfac = -1j * np.pi * np.einsum("ni,ij,nj->n", z, tinv, z) - np.log(_sqrt_det_minus_i_tau(tau))
    return mant * np.exp(1j * logfac.imag), ls + logfac.real


def _min_eig_transformed(tau: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((-np.linalg.inv(tau)).imag)[0])


def select_series(tau: np.ndarray) -> str:
    """Pick the representation whose period matrix has the larger min eigenvalue of Im.

    A larger eigenvalue means faster Gaussian decay and fewer lattice shells
    for the same tolerance.
    """
    lam = _check_tau(tau)
    return "direct" if lam >= _min_eig_transformed(tau) else "transformed"


def siegel_theta_log(z, tau, tol: float = DEFAULT_TOL, method: str = "auto"):
    """Overflow-safe theta: returns (mantissa, log_scale) arrays over the rows of z.

    The truncation bound tol applies to the mantissa of the series actually
    summed, i.e. relative to its Gaussian scale factor.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    tau = np.asarray(tau, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if method == "auto":
        method = select_series(tau)
    if method == "direct":
        return _theta_direct_log(z.reshape(-1, 2), tau, tol)
    if method == "transformed":
        return _theta_transformed_log(z.reshape(-1, 2), tau, tol)
    raise ValueError(f"unknown method {method!r}")


def _finish(z, mant, ls):
    val = mant * np.exp(ls)
    return complex(val[0]) if np.ndim(z) == 1 else val


def siegel_theta(q: ThetaQuery | np.ndarray, tau=None, tol: float = DEFAULT_TOL):
    """Direct lattice summation of Theta(z, tau).

    Accepts either a ThetaQuery or (z, tau[, tol]). z may be a 2-vector or an
    (N, 2) batch sharing one tau.
    """
    if isinstance(q, ThetaQuery):
        z, tau, tol = q.z, q.tau, q.tol
    else:
        z = np.asarray(q, dtype=complex)
        tau = np.asarray(tau, dtype=complex)
    mant, ls = siegel_theta_log(z, tau, tol, method="direct")
    return _finish(z, mant, ls)


def siegel_theta_transformed(q: ThetaQuery | np.ndarray, tau=None, tol: float = DEFAULT_TOL):
    """Theta via the Jacobi-transformed series.

    det(-i tau)^(-1/2) exp(-i pi z^T tau^-1 z) Theta(tau^-1 z, -tau^-1)
    """
    if isinstance(q, ThetaQuery):
        z, tau, tol = q.z, q.tau, q.tol
    else:
        z = np.asarray(q, dtype=complex)
        tau = np.asarray(tau, dtype=complex)
    mant, ls = siegel_theta_log(z, tau, tol, method="transformed")
    return _finish(z, mant, ls)


def shells_needed(tau, tol: float = DEFAULT_TOL, method: str = "direct") -> int:
    """Window half-width used by a series representation at the given tolerance."""
    tau = np.asarray(tau, dtype=complex)
    lam = _check_tau(tau) if method == "direct" else _min_eig_transformed(tau)
    return window_radius(lam, tol)


def _element_log(p: DampingParams, gamma: np.ndarray, j: int, k: int, tol: float):
    g = np.asarray(gamma, dtype=complex).ravel()
    gr, gi = g.real, g.imag
    c, cs = p.coth, p.csch
    d = j - k
    z = np.stack([
        0.5j * d * c - 1j * gr * cs / np.sqrt(2 * np.pi),
        np.full(g.shape, (j + k) / 4.0) - 1j * gi * cs / np.sqrt(8 * np.pi),
    ], axis=-1)
    mant, ls = siegel_theta_log(z, p.tau, tol)
    logpre = (np.log(p.tanh_half / (2 * SQRT_PI * (1 - np.exp(-p.beta)) ** 2))
              - 0.5 * c * (gr * gr + gi * gi)
              - 0.25 * np.pi * d * d * c
              + d * np.sqrt(np.pi / 2) * gr * cs)
    return mant, ls + logpre


def damped_disp_element(beta, gamma, j: int, k: int, tol: float = DEFAULT_TOL):
    """<j| e^{-beta n} D(gamma) e^{-beta n} |k> for ideal square-GKP codewords.

    Vectorised over gamma; the normalisation follows the delta-comb convention
    for ideal codewords, so only ratios are physically meaningful.
    """
    p = _as_params(beta)
    mant, ls = _element_log(p, gamma, int(j), int(k), tol)
    out = (mant * np.exp(ls)).reshape(np.shape(gamma))
    return complex(out) if out.ndim == 0 else out


def damped_disp_matrix(beta, gamma, tol: float = DEFAULT_TOL) -> np.ndarray:
    """2x2 matrices A[..., j, k] = damped_disp_element(beta, gamma, j, k)."""
    p = _as_params(beta)
    shape = np.shape(gamma)
    A = np.empty((int(np.prod(shape, dtype=int)), 2, 2), dtype=complex)
    for j in (0, 1):
        for k in (0, 1):
            mant, ls = _element_log(p, gamma, j, k, tol)
            A[:, j, k] = mant * np.exp(ls)
    return A.reshape(shape + (2, 2))


def ideal_disp_support(alpha: complex, j: int, k: int, atol: float = 1e-12):
    """Support and phase of <j|D(alpha)|k> for ideal codewords.

    Returns None off the delta-comb support, else the unit-modulus phase
    multiplying the delta function.
    """
    x = np.sqrt(2) * np.real(alpha) / SQRT_PI
    y = np.sqrt(2) * np.imag(alpha) / SQRT_PI
    m = np.rint(y)
    two_n = x - (j - k)
    n = np.rint(two_n / 2)
    if abs(y - m) > atol or abs(two_n - 2 * n) > atol:
        return None
    return complex(np.exp(1j * np.pi * m * (2 * n + j + k) / 2))


def damped_pauli_trace(beta, a) -> float:
    """Tr[N sigma_a N] over the ideal code space, N = exp(-beta n).

    Y vanishes identically and X equals Z; both identities are imposed
    structurally, with X and Z taken from the off-diagonal element which has
    no cancellation.
    """
    from .qubit_channels import pauli_index

    p = _as_params(beta)
    idx = pauli_index(a)
    if idx == 0:
        return float((damped_disp_element(p, 0.0, 0, 0) + damped_disp_element(p, 0.0, 1, 1)).real)
    if idx == 2:
        return 0.0
    return float(2 * damped_disp_element(p, 0.0, 0, 1).real)


def norm_factor(beta) -> float:
    """Twirled-encoding normalisation: twice the damped trace of the code projector."""
    return 2.0 * damped_pauli_trace(beta, 0)


def envelope_mixture_probabilities(beta, j: int = 0) -> dict:
    """Weights of the four shifted-envelope components of the twirled |j> state.

    The envelope shift b moves the first bit of the codeword label, so the
    weight is the damped norm of codeword j xor b1 over the total.
    """
    p = _as_params(beta)
    diag = [damped_disp_element(p, 0.0, 0, 0).real, damped_disp_element(p, 0.0, 1, 1).real]
    total = norm_factor(p)
    return {b: float(diag[(j + b[0]) % 2] / total) for b in ((0, 0), (0, 1), (1, 0), (1, 1))}

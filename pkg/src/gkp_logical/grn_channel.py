"""Logical channel of teleportation with Gaussian-random-noise (GRN) GKP resources.

The GRN channel with SB decoding is a Pauli channel. Its conditional PTM is a
theta-function expression over one syndrome unit cell; a bin-parity closed form
(normal CDFs) provides an independent check of the averaged channel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.stats import norm

from .errors import ConvergenceError
from .lattice_theta import DampingParams, siegel_theta_log

SQRT_PI = np.sqrt(np.pi)
CELL_HALF = 0.5 * np.sqrt(np.pi / 2)
CONVENTIONS = ("twirl", "half_tanh", "explicit")

# Pauli coefficient tables: sigma_a = sum c[j, k] |j><k|
_COEFFS = (
    {(0, 0): 1, (1, 1): 1},
    {(0, 1): 1, (1, 0): 1},
    {(0, 1): -1j, (1, 0): 1j},
    {(0, 0): 1, (1, 1): -1},
)


@dataclass(frozen=True)
class GrnVariance:
    sigma2: float
    convention: str = "explicit"

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")


def _var(v) -> GrnVariance:
    return v if isinstance(v, GrnVariance) else GrnVariance(float(v))


def sigma_from_beta(beta: float, convention: str = "half_tanh") -> GrnVariance:
    """Added GRN variance matching damping beta: tanh(beta/2) or tanh(beta)/2."""
    p = DampingParams(float(beta))
    if convention == "twirl":
        return GrnVariance(p.tanh_half, "twirl")
    if convention == "half_tanh":
        return GrnVariance(0.5 * p.tanh, "half_tanh")
    raise ValueError(f"convention must be 'twirl' or 'half_tanh', got {convention!r}")


def _tau(s2: float) -> np.ndarray:
    return np.array([[1j / s2, -1.0], [-1.0, 1j / (4 * s2)]])


def gamma_grn_conditional(v, s, tol: float = 1e-13) -> np.ndarray:
    """Diagonal conditional PTM(s) of the GRN channel for raw syndrome(s) in one cell.

    Returns an array of shape (..., 4, 4) with exact zeros off the diagonal.
    """
    v = _var(v)
    s2 = v.sigma2
    mu = np.asarray(getattr(s, "mu", s), dtype=complex)
    m1 = mu.real.ravel()
    m2 = mu.imag.ravel()
    tau = _tau(s2)
    logpre = -(m1 * m1 + m2 * m2) / (2 * s2) - np.log(4 * np.pi * s2)
    diag = np.zeros((m1.size, 4))
    for a, coeffs in enumerate(_COEFFS):
        acc = np.zeros(m1.size, dtype=complex)
        for (j, k), c in coeffs.items():
            for (jp, kp), cp in coeffs.items():
                if (j + k + jp + kp) % 2:
                    continue
                d = k - jp
                z = np.stack([
                    (1j / (2 * s2)) * ((jp - k) - np.sqrt(2 / np.pi) * m1),
                    np.full(m1.shape, -0.5 * (j - k)) - (1j / (2 * s2)) * m2 / np.sqrt(2 * np.pi),
                ], axis=-1)
                mant, ls = siegel_theta_log(z, tau, tol)
                ex = -(np.pi / 2 * d * d + np.sqrt(2 * np.pi) * d * m1) / (2 * s2)
                acc += c * cp * mant * np.exp(ls + ex + logpre)
        diag[:, a] = acc.real
    out = np.zeros((m1.size, 4, 4))
    idx = np.arange(4)
    out[:, idx, idx] = diag
    return out.reshape(mu.shape + (4, 4))


def _cell_nodes(sd: float, order: int):
    """Composite Gauss-Legendre nodes on one cell axis.

    For narrow Gaussians the peak at the cell centre gets its own panels
    (breaks at 6 and 12 standard deviations), so the rule resolves it at any
    variance.
    """
    breaks = [b for b in (6 * sd, 12 * sd) if b < CELL_HALF]
    edges = np.array(sorted({-CELL_HALF, CELL_HALF, *breaks, *(-b for b in breaks)}))
    t, w = np.polynomial.legendre.leggauss(order)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def gamma_grn_avg(v, order: int = 48, tol: float = 1e-10) -> np.ndarray:
    """Average of the conditional GRN PTM over one syndrome cell.

    The theta function already carries the sum over all lattice images of the
    Gaussian, so a single cell suffices; trace preservation is checked.
    """
    v = _var(v)
    x, wx = _cell_nodes(np.sqrt(v.sigma2), order)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(wx, wx)
    G = gamma_grn_conditional(v, X + 1j * Y)
    g = (W[..., None, None] * G).sum(axis=(0, 1))
    if abs(g[0, 0] - 1) > tol:
        raise ConvergenceError(f"GRN cell average not trace preserving: {g[0, 0]!r}")
    return g


def grn_bin_parity_ptm(v) -> np.ndarray:
    """Closed form from the odd-bin probability of a normal variable with variance 2 sigma^2."""
    v = _var(v)
    p1 = odd_bin_probability(2 * v.sigma2)
    x = 1 - 2 * p1
    return np.diag([1.0, x, x * x, x])


def odd_bin_probability(var: float) -> float:
    """P(x falls in an odd sqrt(pi) bin) for x ~ N(0, var)."""
    sd = np.sqrt(var)
    kmax = int(np.ceil(10 * sd / SQRT_PI)) + 2
    m = np.arange(-kmax, kmax + 1)
    lo = (2 * m + 0.5) * SQRT_PI / sd
    hi = (2 * m + 1.5) * SQRT_PI / sd
    return float(np.sum(norm.cdf(hi) - norm.cdf(lo)))


def twirled_damping_kernel(beta: float, alpha, k) -> np.ndarray:
    """Stabilizer-twirled damping kernel chi(alpha) chi*(alpha - shift_k) times its phase.

    chi is the Gaussian characteristic function of exp(-beta n) and
    shift_k = sqrt(pi/2) (k1 + i k2).
    """
    p = DampingParams(float(beta))
    alpha = np.asarray(alpha, dtype=complex)
    sk = np.sqrt(np.pi / 2) * (k[0] + 1j * k[1])

    def chi(x):
        return np.exp(-np.abs(x) ** 2 / (2 * p.tanh_half)) / (np.pi * (1 - np.exp(-p.beta)))

    phase = np.exp(1j * np.sqrt(np.pi / 2) * (alpha.imag * k[0] - alpha.real * k[1]))
    return chi(alpha) * np.conj(chi(alpha - sk)) * phase


def grn_alpha_kernel(sigma2: float, alpha) -> np.ndarray:
    """Isotropic Gaussian kernel with variance sigma2/2 per component of alpha."""
    alpha = np.asarray(alpha, dtype=complex)
    s = sigma2 / 2
    return np.exp(-np.abs(alpha) ** 2 / (2 * s)) / (2 * np.pi * s)


def _ptm_from_alpha_density(x: np.ndarray, dens: np.ndarray) -> np.ndarray:
    """Logical PTM of SB decoding for a separable alpha density sampled at bin midpoints."""
    h = x[1] - x[0]
    n = np.floor(np.sqrt(2) * x / SQRT_PI + 0.5).astype(int)
    odd = (n % 2) == 1
    p1 = float(np.sum(dens[odd]) * h)
    e = 1 - 2 * p1
    return np.diag([float(np.sum(dens) * h), e, e * e, e])


def _composed_ptm(s1: float, s2: float, per_bin: int) -> np.ndarray:
    h = np.sqrt(np.pi / 2) / per_bin
    half = int(np.ceil((12 * np.sqrt(s1 + s2) + 2) / h))
    xi = np.arange(-half, half + 1) * h
    xm = (np.arange(-half, half) + 0.5) * h

    def gauss(x, var):
        return np.exp(-x * x / (2 * var)) / np.sqrt(2 * np.pi * var)

    if s2 == 0:
        conv = gauss(xm, s1)
    else:
        conv = fftconvolve(gauss(xm, s1), gauss(xi, s2), mode="same") * h
    return _ptm_from_alpha_density(xm, conv)


def grn_variance_additivity_check(s1: float, s2: float, per_bin: int = 256) -> dict:
    """Convolve two Gaussian displacement kernels numerically and compare logical PTMs.

    The per-quadrature kernel of the logical channel has alpha-variance sigma2,
    so convolving kernels with s1 and s2 must reproduce the channel with s1 + s2.
    Bin edges sit on the sampling grid; the midpoint rule is Richardson
    extrapolated over two grid spacings.
    """
    if s1 <= 0 or s2 < 0:
        raise ValueError("variances must be positive")
    coarse = _composed_ptm(s1, s2, per_bin)
    fine = _composed_ptm(s1, s2, 2 * per_bin)
    composed = (4 * fine - coarse) / 3
    direct = gamma_grn_avg(GrnVariance(s1 + s2))
    dev = float(np.abs(composed - direct).max())
    return {"s1": s1, "s2": s2, "max_dev": dev, "composed": composed, "direct": direct}

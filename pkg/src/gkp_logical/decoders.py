"""Syndrome decoders: standard binning, shift selection and optimised lookup tables.

Syndromes are handled in sqrt(2)-scaled coordinates x = sqrt(2) m_q,
y = sqrt(2) m_p, where bins have width sqrt(pi).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .qubit_channels import BITS, LABELS, correction_signs, pauli_index

SQRT_PI = np.sqrt(np.pi)
TWIRL_SET = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Syndrome:
    """Raw homodyne pair; the scaled form is always derived."""

    m_q: float
    m_p: float

    @property
    def mu(self) -> complex:
        return complex(self.m_q, self.m_p)

    @property
    def scaled(self) -> complex:
        return np.sqrt(2) * self.mu

    @classmethod
    def from_mu(cls, mu: complex) -> "Syndrome":
        return cls(float(np.real(mu)), float(np.imag(mu)))


def _mu_of(s) -> np.ndarray:
    return np.asarray(s.mu if isinstance(s, Syndrome) else s, dtype=complex)


def sb_round(x):
    """Nearest multiple of sqrt(pi) with half-open bins: returns (n, x - n sqrt(pi))."""
    x = np.asarray(x, dtype=float)
    n = np.floor(x / SQRT_PI + 0.5)
    frac = x - n * SQRT_PI
    if n.ndim == 0:
        return int(n), float(frac)
    return n.astype(int), frac


def sb_bins(mu) -> tuple:
    """Integer bins of the scaled syndrome along q and p."""
    mu = _mu_of(mu)
    nq, _ = sb_round(np.sqrt(2) * mu.real)
    np_, _ = sb_round(np.sqrt(2) * mu.imag)
    return nq, np_


def sb_pauli_index(mu) -> np.ndarray:
    """Vectorised SB decision as a row index into the I, X, Y, Z order."""
    nq, np_ = sb_bins(mu)
    a1 = np.asarray(nq) % 2
    a2 = np.asarray(np_) % 2
    # (0,0)->0, (1,0)->1, (1,1)->2, (0,1)->3
    return np.where(a2 == 0, a1, 3 - a1)


def sb_pauli(s) -> tuple:
    """Bin parities of a single syndrome as a Pauli bit pair."""
    nq, np_ = sb_bins(s)
    return (int(nq) % 2, int(np_) % 2)


def sb_min_shift(s, sign_choice: tuple = (1, 1)) -> tuple:
    """Smallest corrective shift with the SB logical class; signs pick the direction."""
    a = sb_pauli(s)
    return (int(sign_choice[0]) * a[0], int(sign_choice[1]) * a[1])


def twirl_aware_shift(desired, b: tuple) -> tuple:
    """Shift implementing the desired Pauli that keeps b + shift inside the twirl set."""
    if tuple(b) not in TWIRL_SET:
        raise ValueError(f"b must lie in {TWIRL_SET}, got {b}")
    a = BITS[pauli_index(desired)]
    return (a[0] * (-1) ** b[0], a[1] * (-1) ** b[1])


def sb_measurement_bin(m) -> int:
    """Logical readout bit of a single homodyne value."""
    n, _ = sb_round(m)
    return n % 2


def pauli_scores(gsyn: np.ndarray) -> np.ndarray:
    """Trace of the corrected conditional PTM for each of the four corrections.

    gsyn has shape (..., 4, 4); the result has shape (..., 4).
    """
    diag = np.diagonal(gsyn, axis1=-2, axis2=-1)
    return diag @ correction_signs().T


def choose_optimal(scores: np.ndarray, sb_choice: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Argmax over Paulis, keeping the SB choice unless another is strictly better."""
    best = scores.argmax(axis=-1)
    sb_score = np.take_along_axis(scores, sb_choice[..., None], axis=-1)[..., 0]
    top = scores.max(axis=-1)
    keep = top - sb_score <= rtol * np.abs(top)
    return np.where(keep, sb_choice, best)


@dataclass
class DecoderTable:
    """Pauli decisions on a midpoint-registered grid of scaled syndromes.

    The grid covers cells -radius_cells..radius_cells on each axis with
    ``resolution`` points per cell; outside the grid the SB rule applies.
    """

    resolution: int
    radius_cells: int
    entries: np.ndarray
    provenance: str = "SB"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = (2 * self.radius_cells + 1) * self.resolution
        self.entries = np.asarray(self.entries, dtype=int)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries must have shape {(n, n)}, got {self.entries.shape}")

    @property
    def axis(self) -> np.ndarray:
        return grid_axis(self.resolution, self.radius_cells)

    def lookup(self, mu) -> np.ndarray:
        mu = _mu_of(mu)
        x = np.sqrt(2) * mu.real / SQRT_PI + self.radius_cells + 0.5
        y = np.sqrt(2) * mu.imag / SQRT_PI + self.radius_cells + 0.5
        n = self.entries.shape[0]
        i = np.floor(x * self.resolution).astype(int)
        j = np.floor(y * self.resolution).astype(int)
        inside = (i >= 0) & (i < n) & (j >= 0) & (j < n)
        out = sb_pauli_index(mu)
        out = np.where(inside, self.entries[np.clip(i, 0, n - 1), np.clip(j, 0, n - 1)], out)
        return out

    def labels(self) -> np.ndarray:
        return np.array(LABELS)[self.entries]


def grid_axis(resolution: int, radius_cells: int) -> np.ndarray:
    """Midpoint-registered scaled coordinates covering the table window."""
    n = (2 * radius_cells + 1) * resolution
    return ((np.arange(n) + 0.5) / resolution - radius_cells - 0.5) * SQRT_PI


def sb_table(resolution: int = 101, radius_cells: int = 0) -> DecoderTable:
    ax = grid_axis(resolution, radius_cells)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    entries = sb_pauli_index((X + 1j * Y) / np.sqrt(2))
    return DecoderTable(resolution, radius_cells, entries, "SB")


def optimize_decoder(beta: float, resolution: int = 101, kernel: Callable | None = None,
                     radius_cells: int = 2) -> DecoderTable:
    """Lookup table maximising Tr[Gamma_P Gamma_syn(mu)] at every grid point.

    kernel maps an array of raw syndromes mu to conditional syndrome PTMs of
    shape (..., 4, 4); it defaults to the damped-channel kernel.
    """
    ax = grid_axis(resolution, radius_cells)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    mu = (X + 1j * Y) / np.sqrt(2)
    if kernel is None:
        from .ptd_channel import gamma_syn_shift_grid

        ext = np.concatenate([ax[:resolution] - SQRT_PI, ax])
        gsyn = gamma_syn_shift_grid(beta, ext, resolution).real
    else:
        gsyn = np.asarray(kernel(mu))
    scores = pauli_scores(gsyn)
    entries = choose_optimal(scores, sb_pauli_index(mu))
    return DecoderTable(resolution, radius_cells, entries, f"optimized({beta})",
                        {"beta": beta})


def boundary_offsets(table: DecoderTable) -> dict:
    """Positions along the positive q axis (p = 0 row) where the decision changes.

    Returned in units of sqrt(pi), alongside the SB crossings for comparison.
    """
    ax = table.axis / SQRT_PI
    j0 = int(np.argmin(np.abs(ax)))
    row = table.entries[:, j0]
    change = np.nonzero(row[1:] != row[:-1])[0]
    crossings = 0.5 * (ax[change] + ax[change + 1])
    crossings = crossings[crossings > 0]
    sb = np.arange(0.5, table.radius_cells + 0.5)
    return {"crossings": crossings.tolist(), "sb": sb.tolist()}


def export_decoder_map(t: DecoderTable, out_dir, stem: str = "decoder_map", size_px: int = 512) -> dict:
    """Write the table as CSV (mu_q, mu_p, pauli) and an SVG heatmap with SB boundaries."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ax = t.axis
    csv_path = out / f"{stem}.csv"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mu_q", "mu_p", "pauli"])
    labs = t.labels()
    for i, x in enumerate(ax):
        for j, y in enumerate(ax):
            w.writerow([repr(float(x / np.sqrt(2))), repr(float(y / np.sqrt(2))), labs[i, j]])
    csv_path.write_text(buf.getvalue())
    svg_path = out / f"{stem}.svg"
    from .plotting import decoder_map_svg

    svg_path.write_text(decoder_map_svg(t, size_px))
    return {"csv": str(csv_path), "svg": str(svg_path)}


def load_decoder_map(csv_path, resolution: int, radius_cells: int, provenance: str = "imported") -> DecoderTable:
    """Rebuild a table from its CSV export."""
    rows = list(csv.DictReader(io.StringIO(Path(csv_path).read_text())))
    n = (2 * radius_cells + 1) * resolution
    if len(rows) != n * n:
        raise ValueError(f"expected {n * n} rows, got {len(rows)}")
    labs = np.array([LABELS.index(r["pauli"]) for r in rows]).reshape(n, n)
    return DecoderTable(resolution, radius_cells, labs, provenance)

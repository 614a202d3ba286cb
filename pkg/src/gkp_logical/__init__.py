"""Logical qubit channels of finite-energy GKP error correction.

Submodules:
    lattice_theta   Siegel theta sums and damped displacement matrix elements
    qubit_channels  PTM / chi algebra, CPTP checks, fidelity, serialisation
    decoders        standard binning, shift rules, optimised lookup tables
    ptd_channel     Pauli-twirled damped channel, syndrome quadrature, decay fits
    grn_channel     Gaussian random noise channel and the twirled damping kernel
    fock_oracle     truncated Fock-space reference and Wigner rasters
    cli             command line front end
"""
from importlib.metadata import PackageNotFoundError, version

from .errors import ConvergenceError, CutoffError, DomainError, OracleError
from .grn_channel import GrnVariance, gamma_grn_avg, sigma_from_beta
from .lattice_theta import (
    DampingParams,
    ThetaQuery,
    damped_disp_element,
    damped_pauli_trace,
    norm_factor,
    siegel_theta,
    siegel_theta_transformed,
)
from .ptd_channel import PtdQuery, QuadratureSpec, gamma_avg, gamma_syn_avg_analytic, n_round_fidelity
from .qubit_channels import PTM, ChiMatrix, avg_gate_fidelity, chi_ptm_convert, compose, is_cptp

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"

__all__ = [
    "ChiMatrix", "ConvergenceError", "CutoffError", "DampingParams", "DomainError", "GrnVariance",
    "OracleError", "PTM", "PtdQuery", "QuadratureSpec", "ThetaQuery", "avg_gate_fidelity",
    "chi_ptm_convert", "compose", "damped_disp_element", "damped_pauli_trace", "gamma_avg",
    "gamma_grn_avg", "gamma_syn_avg_analytic", "is_cptp", "n_round_fidelity", "norm_factor",
    "sigma_from_beta", "siegel_theta", "siegel_theta_transformed",
]

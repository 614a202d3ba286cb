"""Cached expensive computations shared across test modules."""
from functools import lru_cache

import numpy as np

from gkp_logical.fock_oracle import FockConfig, build_damped_codeword
from gkp_logical.ptd_channel import gamma_avg_multi

SQRT_PI = np.sqrt(np.pi)


@lru_cache(maxsize=None)
def averaged(beta: float) -> dict:
    """Averaged channels for the none/sb/opt decoders at default quadrature."""
    return gamma_avg_multi(beta, ("none", "sb", "opt"))


@lru_cache(maxsize=None)
def codewords(beta: float, n_max: int = 120, peak_range: int = 8):
    cfg = FockConfig(n_max=n_max, peak_range=peak_range)
    return build_damped_codeword(beta, 0, cfg), build_damped_codeword(beta, 1, cfg)


@lru_cache(maxsize=None)
def decoder_table(beta: float):
    """Optimised decoder table at the default 101-point resolution, radius 2 cells."""
    from gkp_logical.decoders import optimize_decoder

    return optimize_decoder(beta)

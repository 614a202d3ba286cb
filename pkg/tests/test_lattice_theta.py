import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkp_logical.errors import DomainError
from gkp_logical.fock_oracle import oracle_damped_trace_ratios, oracle_ratio_check
from gkp_logical.lattice_theta import (
    DampingParams,
    ThetaQuery,
    damped_disp_element,
    damped_disp_matrix,
    damped_pauli_trace,
    envelope_mixture_probabilities,
    ideal_disp_support,
    norm_factor,
    select_series,
    shells_needed,
    siegel_theta,
    siegel_theta_log,
    siegel_theta_transformed,
)

SQRT_PI = np.sqrt(np.pi)
THETA_CONST_SQ = 1.1803405990160962  # theta_3(0, e^-pi)^2 = sqrt(pi) / Gamma(3/4)^2


def random_tau(ev, angle, re):
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    Y = R @ np.diag(ev) @ R.T
    X = np.array([[re[0], re[1]], [re[1], re[2]]])
    return X + 1j * Y


# ---- DampingParams / ThetaQuery ----

@pytest.mark.parametrize("beta", [0.0, -0.1, np.nan, np.inf])
def test_damping_params_rejects_invalid_beta(beta):
    with pytest.raises(DomainError):
        DampingParams(beta)


@given(st.floats(0.01, 3.0))
def test_damping_params_derived_quantities_consistent(beta):
    p = DampingParams(beta)
    assert p.tanh * p.coth == pytest.approx(1.0, rel=1e-14)
    assert p.sech ** 2 + p.tanh ** 2 == pytest.approx(1.0, rel=1e-14)
    assert p.csch == pytest.approx(1 / np.sinh(beta), rel=1e-14)
    assert p.tanh_half == pytest.approx(np.sinh(beta) / (1 + np.cosh(beta)), rel=1e-13)
    assert p.tau[0, 1] == p.tau[1, 0]


def test_theta_query_rejects_non_positive_imaginary_part():
    with pytest.raises(DomainError):
        ThetaQuery(np.zeros(2), np.array([[1j, 0], [0, -1j]]))


def test_theta_query_rejects_asymmetric_tau():
    with pytest.raises(DomainError):
        ThetaQuery(np.zeros(2), np.array([[1j, 0.1], [0.0, 1j]]))


def test_theta_query_rejects_non_positive_tol():
    with pytest.raises(ValueError):
        ThetaQuery(np.zeros(2), 1j * np.eye(2), tol=0.0)


# ---- theta values ----

def test_theta_large_imaginary_part_is_one():
    assert abs(siegel_theta(np.zeros(2), 50j * np.eye(2)) - 1.0) < 1e-15


def test_theta_identity_period_matches_theta_constant_squared():
    q = ThetaQuery(np.zeros(2), 1j * np.eye(2))
    assert siegel_theta(q) == pytest.approx(THETA_CONST_SQ, abs=1e-13)
    assert siegel_theta_transformed(q) == pytest.approx(THETA_CONST_SQ, abs=1e-13)


def test_theta_integer_shift_invariance():
    tau = 1j * np.eye(2)
    assert siegel_theta(np.array([1.0, 0.0]), tau) == pytest.approx(siegel_theta(np.zeros(2), tau), abs=1e-13)


def test_theta_batch_matches_single_evaluations():
    tau = random_tau([0.7, 2.0], 0.3, [0.1, -0.2, 0.4])
    zs = np.array([[0.1 + 0.2j, -0.3j], [0.5, 0.25 + 0.1j], [0.0, 0.0]])
    batch = siegel_theta(zs, tau)
    for z, b in zip(zs, batch):
        assert siegel_theta(z, tau) == pytest.approx(b, rel=1e-14)


def test_theta_log_form_handles_huge_imaginary_argument():
    tau = 1j * np.eye(2)
    z = np.array([0.0, 30j])
    mant, ls = siegel_theta_log(z, tau)
    # a shift of z by tau*m multiplies theta by exp(-i pi m^T tau m - 2 pi i m^T z)
    mant0, ls0 = siegel_theta_log(np.zeros(2), tau)
    assert np.isfinite(mant).all() and ls[0] > 1000
    log_ratio = np.log(abs(mant[0])) + ls[0] - np.log(abs(mant0[0])) - ls0[0]
    assert log_ratio == pytest.approx(np.pi * 30 ** 2, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(
    ev=st.tuples(st.floats(0.05, 20.0), st.floats(0.05, 20.0)),
    angle=st.floats(0, np.pi),
    re=st.tuples(*[st.floats(-2, 2)] * 3),
    z=st.tuples(*[st.floats(-1, 1)] * 4),
)
def test_jacobi_identity_agreement(ev, angle, re, z):
    tau = random_tau(ev, angle, re)
    zz = np.array([z[0] + 1j * z[1], z[2] + 1j * z[3]])
    a = siegel_theta(zz, tau)
    b = siegel_theta_transformed(zz, tau)
    # rounding of each term leaves eps * sum|terms| however the sum is ordered;
    # sum|terms| is the theta value with the real parts of z and tau dropped
    magnitude = siegel_theta(1j * zz.imag, 1j * tau.imag).real
    assert abs(a - b) <= 1e-10 * abs(a) + 64 * np.finfo(float).eps * magnitude


def test_jacobi_identity_on_random_queries():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(200):
        tau = random_tau(tuple(rng.uniform(0.05, 20.0, 2)), rng.uniform(0, np.pi),
                         tuple(rng.uniform(-2, 2, 3)))
        z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        a = siegel_theta(z, tau)
        worst = max(worst, abs(a - siegel_theta_transformed(z, tau)) / abs(a))
    assert worst <= 1e-10


@settings(max_examples=50, deadline=None)
@given(
    ev=st.tuples(st.floats(0.3, 5.0), st.floats(0.3, 5.0)),
    angle=st.floats(0, np.pi),
    m=st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
)
def test_theta_quasi_periodicity(ev, angle, m):
    tau = random_tau(ev, angle, [0.2, 0.1, -0.3])
    z = np.array([0.1 + 0.05j, -0.2 + 0.1j])
    m = np.array(m, dtype=float)
    lhs = siegel_theta(z + tau @ m, tau)
    rhs = np.exp(-1j * np.pi * m @ tau @ m - 2j * np.pi * m @ z) * siegel_theta(z, tau)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_series_selection_at_small_beta_prefers_direct():
    tau = DampingParams(0.05).tau
    direct = shells_needed(tau, 1e-12, "direct")
    transformed = shells_needed(tau, 1e-12, "transformed")
    assert direct <= 3
    assert direct < transformed
    assert select_series(tau) == "direct"


def test_series_selection_for_small_imaginary_part_prefers_transformed():
    tau = 0.1j * np.eye(2)
    assert select_series(tau) == "transformed"
    assert shells_needed(tau, 1e-12, "transformed") < shells_needed(tau, 1e-12, "direct")


# ---- damped elements ----

@pytest.mark.parametrize("beta", [0.1, 0.3, 1.0])
@pytest.mark.parametrize("j", [0, 1])
def test_element_at_origin_diagonal_real_positive(beta, j):
    e = damped_disp_element(beta, 0.0, j, j)
    assert e.real > 0 and abs(e.imag) <= 1e-15 * e.real


def test_off_diagonal_suppression_factor_at_beta_0_1():
    p = DampingParams(0.1)
    assert 0.25 * np.pi * p.coth == pytest.approx(7.8801, abs=1e-4)
    assert np.exp(-0.25 * np.pi * p.coth) == pytest.approx(3.8e-4, rel=0.01)
    ratio = abs(damped_disp_element(p, 0.0, 0, 1)) / abs(damped_disp_element(p, 0.0, 0, 0))
    # the theta factor adds roughly a factor two on top of the exponential suppression
    assert 1.5 * np.exp(-0.25 * np.pi * p.coth) < ratio < 2.5 * np.exp(-0.25 * np.pi * p.coth)


@settings(max_examples=100, deadline=None)
@given(
    beta=st.floats(0.05, 1.5),
    gr=st.floats(-4, 4),
    gi=st.floats(-4, 4),
    j=st.integers(0, 1),
    k=st.integers(0, 1),
)
def test_element_hermiticity(beta, gr, gi, j, k):
    g = complex(gr, gi)
    a = damped_disp_element(beta, g, j, k)
    b = np.conj(damped_disp_element(beta, -g, k, j))
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)


@settings(max_examples=60, deadline=None)
@given(beta=st.floats(0.05, 1.0), gr=st.floats(-5, 5), gi=st.floats(-5, 5), j=st.integers(0, 1),
       k=st.integers(0, 1))
def test_element_decay_bound(beta, gr, gi, j, k):
    p = DampingParams(beta)
    d = j - k
    c, cs = p.coth, p.csch
    z = np.array([0.5j * d * c - 1j * gr * cs / np.sqrt(2 * np.pi),
                  (j + k) / 4 - 1j * gi * cs / np.sqrt(8 * np.pi)])
    pref = p.tanh_half / (2 * SQRT_PI * (1 - np.exp(-beta)) ** 2)
    env = np.exp(-0.5 * c * (gr * gr + gi * gi) - 0.25 * np.pi * d * d * c + d * np.sqrt(np.pi / 2) * gr * cs)
    bound = pref * env * siegel_theta(1j * z.imag, 1j * p.tau.imag).real
    assert abs(damped_disp_element(p, complex(gr, gi), j, k)) <= bound * (1 + 1e-10)


def test_element_matrix_vectorised_matches_scalar():
    gam = np.array([[0.1 + 0.2j, -1.0], [0.5j, 2.0 - 1.0j]])
    A = damped_disp_matrix(0.2, gam)
    assert A.shape == (2, 2, 2, 2)
    for idx in np.ndindex(gam.shape):
        for j in (0, 1):
            for k in (0, 1):
                assert A[idx][j, k] == pytest.approx(damped_disp_element(0.2, gam[idx], j, k), rel=1e-13)


@pytest.mark.parametrize("beta", [0.1, 0.2, 0.4])
def test_element_ratios_match_fock_oracle(beta):
    # polar grid reaching |gamma| = 2 sqrt(pi)
    r = np.linspace(0, 2 * SQRT_PI, 5)
    th = np.linspace(0, 2 * np.pi, 7, endpoint=False)
    grid = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    rep = oracle_ratio_check(beta, grid)
    assert rep["max_rel_dev"] <= 1e-6


# ---- ideal support ----

def test_ideal_support_logical_x():
    assert ideal_disp_support(np.sqrt(np.pi / 2), 0, 1) == pytest.approx(1.0)


def test_ideal_support_logical_z_sign_on_one():
    assert ideal_disp_support(1j * np.sqrt(np.pi / 2), 1, 1) == pytest.approx(-1.0)


@pytest.mark.parametrize("j,k", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_ideal_support_off_lattice_is_zero(j, k):
    assert ideal_disp_support(0.3 + 0.1j, j, k) is None


def test_ideal_support_parity_mismatch_is_zero():
    # a logical X shift cannot connect |0> to |0>
    assert ideal_disp_support(np.sqrt(np.pi / 2), 0, 0) is None


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 1), st.integers(0, 1))
def test_ideal_support_phase_is_unit_modulus(m, n, j, k):
    alpha = (SQRT_PI * (2 * n + j - k) + 1j * SQRT_PI * m) / np.sqrt(2)
    ph = ideal_disp_support(alpha, j, k)
    assert ph is not None and abs(abs(ph) - 1) < 1e-12


# ---- damped traces and normalisation ----

def test_damped_trace_y_is_exactly_zero():
    assert damped_pauli_trace(0.2, "Y") == 0.0


def test_damped_trace_x_equals_z():
    assert damped_pauli_trace(0.2, "X") == damped_pauli_trace(0.2, "Z")


@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5])
def test_damped_trace_ratios_match_fock_oracle(beta):
    # the oracle computes Z from the diagonal elements, independently of X
    o = oracle_damped_trace_ratios(beta)
    t = {lab: damped_pauli_trace(beta, lab) / damped_pauli_trace(beta, "I") for lab in "IXYZ"}
    for lab in "IXYZ":
        assert o[lab] == pytest.approx(t[lab], abs=1e-6)


def test_norm_factor_is_twice_identity_trace():
    assert norm_factor(0.3) == pytest.approx(2 * damped_pauli_trace(0.3, 0), rel=1e-15)


def test_mixture_probabilities_beta_0_4():
    p = envelope_mixture_probabilities(0.4)
    assert [round(p[b], 2) for b in ((0, 0), (0, 1), (1, 0), (1, 1))] == [0.31, 0.31, 0.19, 0.19]


def test_mixture_probabilities_beta_0_2():
    p = envelope_mixture_probabilities(0.2)
    assert [round(p[b], 2) for b in ((0, 0), (0, 1), (1, 0), (1, 1))] == [0.26, 0.26, 0.24, 0.24]


@given(st.floats(0.02, 2.0), st.integers(0, 1))
def test_mixture_probabilities_sum_to_one(beta, j):
    assert sum(envelope_mixture_probabilities(beta, j).values()) == pytest.approx(1.0, abs=1e-14)

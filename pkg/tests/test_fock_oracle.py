import numpy as np
import pytest

from gkp_logical.errors import CutoffError
from gkp_logical.fock_oracle import (
    FockConfig,
    build_damped_codeword,
    displacement_matrix,
    hermite_functions,
    logical_pauli_operator,
    oracle_damped_element,
    oracle_damped_trace_ratios,
    oracle_ratio_check,
    position_density,
    pure_density_matrix,
    twirled_density_matrix,
    validate_sign_rule,
    wigner_point,
    wigner_raster,
)
from gkp_logical.lattice_theta import (
    damped_disp_element,
    damped_pauli_trace,
    envelope_mixture_probabilities,
)
from gkp_logical.ptd_channel import sign_rule

from helpers import SQRT_PI, codewords

SHIFT = np.sqrt(np.pi / 2)


# ---- codewords ----

def test_hermite_functions_orthonormal():
    x = np.linspace(-15, 15, 6001)
    H = hermite_functions(40, x)
    gram = H.T @ H * (x[1] - x[0])
    assert np.abs(gram - np.eye(40)).max() < 1e-10


def test_zero_codeword_has_even_support():
    v0, v1 = codewords(0.2)
    assert np.abs(v0[1::2]).max() <= 1e-14 * np.abs(v0).max()
    assert np.abs(v1).max() > 0


def test_codewords_not_orthogonal():
    v0, v1 = codewords(0.2)
    r = (v0 @ v1) / (v0 @ v0)
    assert 0 < r < 0.1
    ref = damped_disp_element(0.2, 0.0, 0, 1) / damped_disp_element(0.2, 0.0, 0, 0)
    assert r == pytest.approx(ref.real, rel=1e-6)


def test_cutoff_error_for_small_n_max():
    with pytest.raises(CutoffError):
        build_damped_codeword(0.1, 0, FockConfig(n_max=60))


def test_cutoff_error_for_few_peaks():
    with pytest.raises(CutoffError):
        build_damped_codeword(0.1, 0, FockConfig(peak_range=1))


def test_tail_and_peak_invariants_hold_at_defaults():
    cfg = FockConfig()
    wider = FockConfig(peak_range=cfg.peak_range + 2)
    for j in (0, 1):
        a = build_damped_codeword(0.1, j, cfg)
        b = build_damped_codeword(0.1, j, wider)
        assert np.abs(a - b).max() <= 1e-10 * np.abs(a).max()


def test_non_positive_beta_rejected():
    with pytest.raises(ValueError):
        build_damped_codeword(0.0, 0)


# ---- displacements ----

def test_displacement_at_zero_is_identity():
    assert np.allclose(displacement_matrix(0.0, 30), np.eye(30), atol=1e-15)


@pytest.mark.parametrize("alpha", [0.4 + 0.2j, -1.1 + 0.7j, 2.0j])
def test_displacement_inverse(alpha):
    n = 40
    prod = displacement_matrix(alpha, n + 80) @ displacement_matrix(-alpha, n + 80)
    assert np.abs(prod[:n, :n] - np.eye(n)).max() <= 1e-9


@pytest.mark.parametrize("a,b", [(0.3 + 0.1j, -0.5 + 0.4j), (1.0, 1.0j), (SHIFT, 1j * SHIFT)])
def test_displacement_composition_rule(a, b):
    n = 40
    lhs = displacement_matrix(a, n + 80) @ displacement_matrix(b, n + 80)
    phase = np.exp(0.5 * (a * np.conj(b) - np.conj(a) * b))
    rhs = phase * displacement_matrix(a + b, n + 80)
    assert np.abs(lhs[:n, :n] - rhs[:n, :n]).max() <= 1e-9


def test_displacement_acts_on_vacuum_as_coherent_state():
    alpha = 0.8 - 0.3j
    col = displacement_matrix(alpha, 40)[:, 0]
    n = np.arange(40)
    from scipy.special import gammaln

    ref = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha + 0j) - 0.5 * gammaln(n + 1))
    assert np.abs(col - ref).max() < 1e-12


def test_displacement_too_large_for_padding_raises():
    with pytest.raises(CutoffError):
        displacement_matrix(6.0, 120, pad=10)


# ---- oracle elements ----

@pytest.mark.parametrize("beta", [0.1, 0.2, 0.4])
def test_ratio_check_on_grid(beta):
    g = np.linspace(-SQRT_PI, SQRT_PI, 5)
    grid = g[:, None] + 1j * g[None, :]
    rep = oracle_ratio_check(beta, grid)
    assert rep["max_rel_dev"] <= 1e-6
    assert len(rep["grid"]) == 25 and rep["n_max"] == 120


def test_stabilizer_shift_suppresses_element():
    beta = 0.2
    v = codewords(beta)
    e0 = oracle_damped_element(beta, 0.0, 0, 0, codewords=v)
    es = oracle_damped_element(beta, 2 * SHIFT, 0, 0, codewords=v)
    assert 0 < es.real < e0.real
    assert abs(es.imag) < 1e-12 * abs(es)
    ref = damped_disp_element(beta, 2 * SHIFT, 0, 0) / damped_disp_element(beta, 0.0, 0, 0)
    assert es / e0 == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("gamma", [0.3 + 0.2j, -0.8 + 1.1j])
def test_oracle_element_hermiticity(gamma):
    v = codewords(0.2)
    a = oracle_damped_element(0.2, gamma, 0, 1, codewords=v)
    b = oracle_damped_element(0.2, -gamma, 1, 0, codewords=v)
    assert a == pytest.approx(np.conj(b), rel=1e-10)


def test_doubling_cutoff_changes_ratios_below_1e_8():
    beta = 0.1
    small = FockConfig(n_max=120)
    large = FockConfig(n_max=240)
    vs = (build_damped_codeword(beta, 0, small), build_damped_codeword(beta, 1, small))
    vl = (build_damped_codeword(beta, 0, large), build_damped_codeword(beta, 1, large))
    for gamma in (0.0, 0.5 + 0.5j, SQRT_PI):
        for j, k in ((0, 0), (0, 1), (1, 1)):
            rs = oracle_damped_element(beta, gamma, j, k, small, vs) / (vs[0] @ vs[0])
            rl = oracle_damped_element(beta, gamma, j, k, large, vl) / (vl[0] @ vl[0])
            assert abs(rs - rl) <= 1e-8


@pytest.mark.parametrize("beta", [0.1, 0.2, 0.4])
def test_damped_trace_ratios_match_theta_path(beta):
    r = oracle_damped_trace_ratios(beta)
    T = damped_pauli_trace(beta, "I")
    for lab in "XZ":
        assert r[lab] == pytest.approx(damped_pauli_trace(beta, lab) / T, rel=1e-6)
    assert r["Y"] == 0.0


# ---- logical Paulis and sign rule ----

def test_logical_paulis_act_on_codewords():
    beta, n = 0.2, 120
    v0, v1 = codewords(beta)
    X = logical_pauli_operator("X", n)
    Z = logical_pauli_operator("Z", n)
    norm = v0 @ v0
    assert (v1.conj() @ X @ v0).real / norm > 0.5
    assert (v0.conj() @ Z @ v0).real / norm > 0.5
    assert (v1.conj() @ Z @ v1).real / norm < -0.5
    assert np.array_equal(logical_pauli_operator("I", 10), np.eye(10))


def test_sign_rule_validation_all_pairs():
    rep = validate_sign_rule(sign_fn=sign_rule)
    assert rep["ok"] and len(rep["outcomes"]) == 16
    table = {(o["a_prime"], tuple(o["b"])): o["measured"] for o in rep["outcomes"]}
    assert all(table[("I", b)] == 1 for b in ((0, 0), (0, 1), (1, 0), (1, 1)))
    assert table[("Z", (1, 0))] == -1
    assert table[("Y", (1, 1))] == 1


def test_sign_rule_validation_detects_wrong_rule():
    rep = validate_sign_rule(sign_fn=lambda a, b: 1)
    assert not rep["ok"]
    # six of the sixteen pairs anticommute
    assert sum(not o["match"] for o in rep["outcomes"]) == 6


# ---- mixtures ----

@pytest.mark.parametrize("beta", [0.1, 0.4])
def test_envelope_weights_match_theta_path(beta):
    cfg = FockConfig()
    big = cfg.n_max + cfg.pad
    v = [np.zeros(big) for _ in (0, 1)]
    for j in (0, 1):
        v[j][:cfg.n_max] = build_damped_codeword(beta, j, cfg)
    w = {}
    for b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        u = (displacement_matrix(SHIFT * (b[0] + 1j * b[1]), big, cfg.pad) @ v[b[0]])[:cfg.n_max]
        w[b] = np.vdot(u, u).real
    total = sum(w.values())
    ref = envelope_mixture_probabilities(beta, 0)
    for b in w:
        assert w[b] / total == pytest.approx(ref[b], abs=1e-8)


def test_mixture_weights_near_uniform_at_beta_0_1():
    ref = envelope_mixture_probabilities(0.1, 0)
    assert [round(x, 2) for x in ref.values()] == [0.25] * 4


def test_twirled_density_matrix_is_a_state():
    rho = twirled_density_matrix(0.2)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.abs(rho - rho.conj().T).max() < 1e-14
    assert np.linalg.eigvalsh(rho).min() > -1e-12


# ---- Wigner functions ----

@pytest.fixture(scope="module")
def pure_raster():
    beta = 0.2
    v0, _ = codewords(beta)
    ext = np.ceil(np.sqrt(np.log(1e6) / np.tanh(beta)) + SQRT_PI)
    q = np.linspace(-ext, ext, 2 * int(ext / 0.1) + 1)
    return v0, wigner_raster(v0, q, q)


def test_wigner_total_close_to_one(pure_raster):
    _, w = pure_raster
    assert abs(w.meta["total"] - 1) <= 0.02
    assert "warning" not in w.meta


def test_wigner_marginal_matches_position_density(pure_raster):
    v0, w = pure_raster
    marginal = w.values.sum(axis=1) * (w.p[1] - w.p[0])
    assert np.abs(marginal - position_density(v0, w.q)).max() <= 1e-4


def test_wigner_raster_matches_pointwise_formula(pure_raster):
    v0, w = pure_raster
    rho = pure_density_matrix(v0)
    for i, j in ((110, 110), (90, 120), (125, 85), (100, 131)):
        assert w.values[i, j] == pytest.approx(wigner_point(rho, w.q[i], w.p[j]), abs=1e-8)


def test_wigner_small_grid_warns():
    v0, _ = codewords(0.2)
    q = np.linspace(-3, 3, 31)
    assert "warning" in wigner_raster(v0, q, q).meta


def test_mixed_state_wigner_has_four_envelope_centres():
    beta = 0.1
    rho = twirled_density_matrix(beta)
    # the mixture of the four shifted envelopes has mean position/momentum at half the shift
    q = np.linspace(-14, 14, 281)
    w = wigner_raster(rho, q, q)
    h = (q[1] - q[0]) ** 2
    mq = (w.values.sum(axis=1) * q).sum() * h / (w.values.sum() * h)
    mp = (w.values.sum(axis=0) * q).sum() * h / (w.values.sum() * h)
    probs = envelope_mixture_probabilities(beta, 0)
    expect_q = np.sqrt(2) * SHIFT * (probs[(1, 0)] + probs[(1, 1)])
    expect_p = np.sqrt(2) * SHIFT * (probs[(0, 1)] + probs[(1, 1)])
    assert mq == pytest.approx(expect_q, abs=2e-2)
    assert mp == pytest.approx(expect_p, abs=2e-2)


def test_damped_wigner_is_envelope_times_blurred_comb():
    beta = 0.1
    v0, _ = codewords(beta)
    g = np.linspace(-SQRT_PI, SQRT_PI, 41)
    W = wigner_raster(v0, g, g).values
    Q, P = np.meshgrid(g, g, indexing="ij")
    var = np.tanh(beta) / 2
    sech = 1 / np.cosh(beta)
    comb = np.zeros_like(Q)
    for n in range(-6, 7):
        for m in range(-12, 13):
            dq = sech * Q - n * SQRT_PI
            dp = sech * P - m * SQRT_PI / 2
            comb += (-1) ** (n * m) * np.exp(-(dq ** 2 + dp ** 2) / (2 * var)) / (2 * np.pi * var)
    model = np.exp(-np.tanh(beta) * (Q ** 2 + P ** 2)) * comb
    c = W[20, 20] / model[20, 20]
    assert np.abs(W - c * model).max() <= 1e-3 * np.abs(W).max()

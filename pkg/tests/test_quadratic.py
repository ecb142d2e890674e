"""Two-mode quadratic forms: spectra, Bogoliubov maps and decay-dressed coefficients."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optomag.errors import CascadeError, UnstableFormError
from optomag.params import critical_coupling
from optomag.quadratic import (
    ETA,
    QuadraticBosonForm,
    Stability,
    bogoliubov_diagonalize,
    closed_form_eigenvalues,
    cp_mode_projection,
    decay_dressed_coeffs,
    dynamical_matrix,
    ideal_cp_coeffs,
    match_eigenvalues,
    numeric_eigenvalues,
    stability_classify,
)


def _random_forms(n, seed, *, stable_only=False, with_decay=True):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        W_a, W_c = rng.uniform(0.1, 10.0, 2)
        K = rng.uniform(0.0, 3.0) if with_decay else 0.0
        G_cp, G_cpp = critical_coupling(W_a, W_c, K)
        top = 0.999 * G_cp if stable_only else 2.0 * G_cpp
        G = rng.uniform(-top, top)
        out.append((W_a, W_c, G, K))
    return out


def test_coefficient_matrix_is_hermitian():
    M = QuadraticBosonForm(1.0, 2.0, 0.3).coefficient_matrix()
    assert np.array_equal(M, M.conj().T)


def test_dissipationless_drift_matrix():
    form = QuadraticBosonForm(1.0, 2.0, 0.3)
    D = dynamical_matrix(form).matrix
    assert np.allclose(D, -1j * ETA @ form.coefficient_matrix(), rtol=0, atol=0)


def test_closed_form_matches_numeric_on_random_draws():
    worst = 0.0
    for W_a, W_c, G, K in _random_forms(1000, seed=7):
        ref = np.array(closed_form_eigenvalues(W_a, W_c, G, K))
        num = match_eigenvalues(ref, numeric_eigenvalues(
            dynamical_matrix(QuadraticBosonForm(W_a, W_c, G), K)))
        worst = max(worst, np.max(np.abs(num - ref)) / np.max(np.abs(ref)))
    assert worst <= 1e-10


def test_eigenvalues_at_critical_coupling_with_decay():
    K = 0.3
    ref = closed_form_eigenvalues(1.0, 1.0, 0.5, K)
    assert ref[0] == ref[1] == -1j * K
    num = match_eigenvalues(ref, numeric_eigenvalues(
        dynamical_matrix(QuadraticBosonForm(1.0, 1.0, 0.5), K), dps=40))
    assert np.max(np.abs(num - np.array(ref))) <= 1e-10


@pytest.mark.parametrize("W_a,W_c,K,G", [(1.0, 1.0, 1.0, 1.0), (4.0, 1.0, 2.0, 2.5)])
def test_lbp_eigenvalue_vanishes_at_shifted_critical_coupling(W_a, W_c, K, G):
    assert critical_coupling(W_a, W_c, K)[1] == G
    ref = closed_form_eigenvalues(W_a, W_c, G, K)
    assert ref[0] == 0
    assert ref[1] == pytest.approx(-2j * K, abs=1e-15)
    num = match_eigenvalues(ref, numeric_eigenvalues(
        dynamical_matrix(QuadraticBosonForm(W_a, W_c, G), K), dps=40))
    assert np.max(np.abs(num - np.array(ref))) <= 1e-10


def test_double_precision_limited_at_exact_criticality():
    # defective spectrum: plain LAPACK only resolves sqrt(eps)
    num = numeric_eigenvalues(dynamical_matrix(QuadraticBosonForm(1.0, 1.0, 0.5), 0.3))
    err = np.min(np.abs(num + 0.3j))
    assert 1e-14 < err < 1e-6


# ---------------------------------------------------------------------------
# Bogoliubov map
# ---------------------------------------------------------------------------

def test_bogoliubov_suite_on_random_stable_forms():
    worst = dict(metric=0.0, roundtrip=0.0, offdiag=0.0, diag=0.0)
    for W_a, W_c, G, _ in _random_forms(1000, seed=11, stable_only=True, with_decay=False):
        form = QuadraticBosonForm(W_a, W_c, G)
        bm = bogoliubov_diagonalize(form)
        scale = max(W_a, W_c)
        Mt = bm.transformed_matrix(form)
        target = np.diag([bm.Omega_A, bm.Omega_A, bm.Omega_C, bm.Omega_C])
        worst["metric"] = max(worst["metric"], bm.metric_error())
        worst["roundtrip"] = max(worst["roundtrip"], bm.roundtrip_error())
        worst["offdiag"] = max(worst["offdiag"], np.max(np.abs(Mt - np.diag(np.diag(Mt)))) / scale)
        worst["diag"] = max(worst["diag"], np.max(np.abs(np.diag(Mt) - np.diag(target))) / scale)
    assert all(v <= 1e-10 for v in worst.values()), worst


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-0.99, 0.99))
def test_bogoliubov_preserves_commutators(W_a, W_c, frac):
    G = frac * critical_coupling(W_a, W_c)[0]
    bm = bogoliubov_diagonalize(QuadraticBosonForm(W_a, W_c, G))
    assert bm.metric_error() <= 1e-10
    assert bm.roundtrip_error() <= 1e-10


def test_uncoupled_map_is_identity():
    bm = bogoliubov_diagonalize(QuadraticBosonForm(1.0, 2.0, 0.0))
    assert np.allclose(np.abs(bm.forward), np.eye(4), atol=1e-15)


def test_lbp_position_coefficient_near_criticality():
    W = 1.0
    ratio = 1e-4
    G = 0.5 * (W ** 2 - (ratio * W) ** 2) / W
    bm = bogoliubov_diagonalize(QuadraticBosonForm(W, W, G))
    assert bm.Omega_A == pytest.approx(ratio * W, rel=1e-6)
    u, v = bm.lbp_position_coefficient()
    x_zpf = math.sqrt(W / (8 * bm.Omega_A))
    assert abs(u) == pytest.approx(x_zpf, rel=1e-2)
    assert abs(v) == pytest.approx(x_zpf, rel=1e-2)


@pytest.mark.parametrize("frac", [1.0, 1.5])
def test_no_map_at_or_beyond_criticality(frac):
    with pytest.raises(UnstableFormError):
        bogoliubov_diagonalize(QuadraticBosonForm(1.0, 1.0, 0.5 * frac))


def test_cp_projection_guards():
    x, y = cp_mode_projection(1.0, 1e-6, W_a=1.0)
    assert x == pytest.approx(353.5533905932738, rel=1e-15) and y == -x
    with pytest.raises(CascadeError, match="resonant"):
        cp_mode_projection(1.0, 1e-6, W_a=2.0)
    with pytest.raises(CascadeError, match="criticality"):
        cp_mode_projection(1.0, 0.5)
    with pytest.raises(CascadeError):
        cp_mode_projection(1.0, 0.0)


# ---------------------------------------------------------------------------
# decay-dressed coefficients
# ---------------------------------------------------------------------------

def test_critical_lbp_coefficient_at_equal_rates():
    a_plus, _, _ = ideal_cp_coeffs(1.0, 1.0)
    assert abs(a_plus - 1 / (2 * math.sqrt(2))) <= 1e-12


@pytest.mark.parametrize("lam", [0.1, 10.0])
def test_critical_coefficients_are_scale_free(lam):
    for w in (0.05, 1.0, 3.0, 40.0):
        base = ideal_cp_coeffs(w, 1.0)
        scaled = ideal_cp_coeffs(lam * w, lam)
        for x, y in zip(base, scaled):
            assert abs(x - y) <= 1e-12 * max(1.0, abs(x))


def test_weak_squeezed_frequency_suppresses_lbp_coefficient():
    vals = [ideal_cp_coeffs(w, 1.0)[0] for w in (1e-1, 1e-2, 1e-3)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-5


def test_closed_forms_agree_with_general_coefficients():
    W, K = 1.7, 0.6
    ideal = ideal_cp_coeffs(W, K)
    Omega_C = math.sqrt(2) * W
    up = decay_dressed_coeffs(W, K, -1j * K, -1j * K + Omega_C)
    down = decay_dressed_coeffs(W, K, -1j * K, -1j * K - Omega_C)
    assert up.a_plus == pytest.approx(ideal[0], rel=1e-14)
    # the upper branch of the UBP eigenvalue carries the 3 - 2 sqrt 2 prefactor
    assert up.c_plus == pytest.approx(ideal[2], rel=1e-14)
    assert down.c_plus == pytest.approx(ideal[1], rel=1e-14)


def test_dissipationless_magnitudes():
    W, Om = 2.0, 0.3
    c = decay_dressed_coeffs(W, 0.0, Om, 2.5)
    assert c.a_plus == pytest.approx((W - Om) ** 2 / (2 * W * Om), rel=1e-14)
    assert c.a_minus == pytest.approx((W + Om) ** 2 / (2 * W * Om), rel=1e-14)
    assert c.phi_a_plus == pytest.approx(0.0, abs=1e-15)


def test_ubp_coupling_suppressed_near_dissipationless_criticality():
    W = 1.0
    Omega_A = 1e-6 * W
    Omega_C = math.sqrt(2 * W ** 2 - Omega_A ** 2)
    c = decay_dressed_coeffs(W, 0.0, Omega_A, Omega_C)
    assert c.c_plus / c.a_plus < 1e-6


def test_dressed_phases_follow_principal_branch():
    W, K, Om = 1.0, 0.4, 0.8 - 0.4j
    c = decay_dressed_coeffs(W, K, Om, 1.5 - 0.4j)
    Wt = complex(W, -K)
    root = cmath.sqrt(2 * Wt * Om)
    assert c.phi_a_plus == pytest.approx(cmath.phase((Wt + Om) / root), abs=1e-15)


def test_degenerate_normalization_raises():
    with pytest.raises(CascadeError):
        decay_dressed_coeffs(1.0, 0.0, 0.0, 1.4)


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

def test_stability_across_critical_point():
    assert stability_classify(1.0, 1.0, 0.49) is Stability.STABLE
    assert stability_classify(1.0, 1.0, 0.5) is Stability.CRITICAL
    assert stability_classify(1.0, 1.0, 0.51) is Stability.UNSTABLE


def test_decay_extends_stable_region():
    K = 0.5
    G_cp, G_cpp = critical_coupling(1.0, 1.0, K)
    mid = 0.5 * (G_cp + G_cpp)
    assert stability_classify(1.0, 1.0, mid, K) is Stability.STABLE
    assert stability_classify(1.0, 1.0, mid, 0.0) is Stability.UNSTABLE
    assert stability_classify(1.0, 1.0, 1.01 * G_cpp, K) is Stability.UNSTABLE
    assert stability_classify(1.0, 1.0, G_cpp, K) is Stability.CRITICAL


def test_near_critical_stable_point_is_not_flagged_critical(ref_params):
    assert stability_classify(ref_params.W_a, ref_params.W_c, ref_params.G_sq) is Stability.STABLE

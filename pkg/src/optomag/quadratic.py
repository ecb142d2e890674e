"""Two-mode quadratic boson forms.

The form is ``W_a a^dag a + W_c c^dag c + G (a^dag + a)(c^dag + c)`` over the
operator vector ``R = (a, a^dag, c, c^dag)``.  Writing ``H = R^dag M R / 2``
(up to a constant) gives the Hermitian coefficient matrix ``M``; the
Heisenberg-Langevin drift with per-mode decay is ``D = -i eta M - K`` with
the commutation metric ``eta = diag(1, -1, 1, -1)``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CascadeError, UnstableFormError
from .params import critical_coupling, polariton_spectrum

__all__ = [
    "ETA",
    "QuadraticBosonForm",
    "DynamicalMatrix",
    "BogoliubovMap",
    "DecayDressedCoeffs",
    "Stability",
    "dynamical_matrix",
    "closed_form_eigenvalues",
    "numeric_eigenvalues",
    "match_eigenvalues",
    "bogoliubov_diagonalize",
    "cp_mode_projection",
    "decay_dressed_coeffs",
    "ideal_cp_coeffs",
    "stability_classify",
]

ETA = np.diag([1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class QuadraticBosonForm:
    W_a: float
    W_c: float
    G_sq: float

    def coefficient_matrix(self):
        Wa, Wc, G = self.W_a, self.W_c, self.G_sq
        return np.array([
            [Wa, 0, G, G],
            [0, Wa, G, G],
            [G, G, Wc, 0],
            [G, G, 0, Wc],
        ], dtype=complex)


@dataclass(frozen=True)
class DynamicalMatrix:
    """Drift matrix ``D`` acting on ``(a_s, a_s^dag, c_s, c_s^dag)``."""

    matrix: np.ndarray
    K_a: float
    K_c: float

    def frequencies(self):
        """Eigenvalues of ``i D``: real parts are frequencies, imaginary parts decay."""
        return np.linalg.eigvals(1j * self.matrix)


def dynamical_matrix(form: QuadraticBosonForm, K_a=0.0, K_c=None) -> DynamicalMatrix:
    if K_c is None:
        K_c = K_a
    decay = np.diag([K_a, K_a, K_c, K_c]).astype(complex)
    D = -1j * ETA @ form.coefficient_matrix() - decay
    return DynamicalMatrix(D, K_a, K_c)


def _lower_sqrt(x):
    # Branch with Im <= 0 for negative reals, so that at G_sq = G_cp' the
    # "minus" eigenvalue is the one that reaches zero.
    if x >= 0:
        return complex(math.sqrt(x), 0.0)
    return complex(0.0, -math.sqrt(-x))


def closed_form_eigenvalues(W_a, W_c, G_sq, K=0.0):
    """Analytic eigenvalues of ``i D`` for equal decay rates.

    Returns ``(Omega_A_minus, Omega_A_plus, Omega_C_minus, Omega_C_plus)``
    where ``Omega_X^(+/-) = -iK +/- sqrt(Omega_X^2)``.
    """
    Omega_A_sq, Omega_C_sq, _ = polariton_spectrum(W_a, W_c, G_sq)
    sA, sC = _lower_sqrt(Omega_A_sq), _lower_sqrt(Omega_C_sq)
    shift = -1j * K
    return (shift - sA, shift + sA, shift - sC, shift + sC)


def numeric_eigenvalues(D: DynamicalMatrix, *, dps=None):
    """Eigenvalues of ``i D`` from a general eigensolver.

    With ``dps`` set, the solve runs in mpmath at that many decimal digits;
    this resolves the defective (Jordan-block) spectrum at exact
    criticality, where double precision only reaches ``sqrt(eps)``.
    """
    if dps is None:
        return D.frequencies()
    import mpmath

    with mpmath.workdps(dps):
        A = mpmath.matrix([[1j * complex(v) for v in row] for row in D.matrix])
        ev = mpmath.eig(A, left=False, right=False)
        return np.array([complex(v) for v in ev])


def match_eigenvalues(reference, candidates):
    """Reorder ``candidates`` to pair with ``reference`` by minimum total distance."""
    ref = np.asarray(reference, dtype=complex)
    cand = np.asarray(candidates, dtype=complex)
    cost = np.abs(ref[:, None] - cand[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(ref)
    out[rows] = cand[cols]
    return out


@dataclass(frozen=True)
class BogoliubovMap:
    """Linear map ``(A, A^dag, C, C^dag) = forward @ (a_s, a_s^dag, c_s, c_s^dag)``."""

    forward: np.ndarray
    inverse: np.ndarray
    Omega_A: float
    Omega_C: float
    theta: float

    def metric_error(self):
        """Deviation of ``T eta T^dag`` from ``eta`` (bosonic commutators)."""
        T = self.forward
        return float(np.max(np.abs(T @ ETA @ T.conj().T - ETA)))

    def roundtrip_error(self):
        return float(np.max(np.abs(self.inverse @ self.forward - np.eye(4))))

    def transformed_matrix(self, form: QuadraticBosonForm):
        """Coefficient matrix of ``form`` expressed in the polariton operators."""
        Tinv = self.inverse
        return Tinv.conj().T @ form.coefficient_matrix() @ Tinv

    def lbp_position_coefficient(self):
        """Coefficients ``(u, v)`` in ``a_s = u A + v A^dag + ...``."""
        return self.inverse[0, 0], self.inverse[0, 1]


def bogoliubov_diagonalize(form: QuadraticBosonForm) -> BogoliubovMap:
    """Polariton operators of a stable two-mode form.

    Raises
    ------
    UnstableFormError
        If ``Omega_A^2 <= 0`` (critical or unstable form).
    """
    Wa, Wc, G = form.W_a, form.W_c, form.G_sq
    if Wa <= 0 or Wc <= 0:
        raise UnstableFormError("W_a and W_c must be positive")
    Omega_A_sq, Omega_C_sq, theta = polariton_spectrum(Wa, Wc, G)
    if Omega_A_sq <= 0:
        raise UnstableFormError(f"Omega_A^2 = {Omega_A_sq:.6g} <= 0: critical or unstable form")
    OA, OC = math.sqrt(Omega_A_sq), math.sqrt(Omega_C_sq)
    ct, st = math.cos(theta), math.sin(theta)
    na = 2.0 * math.sqrt(Wa * OA)
    nc = 2.0 * math.sqrt(Wc * OA)
    ma = 2.0 * math.sqrt(Wa * OC)
    mc = 2.0 * math.sqrt(Wc * OC)
    A = [ct * (OA + Wa) / na, ct * (OA - Wa) / na, -st * (OA + Wc) / nc, -st * (OA - Wc) / nc]
    C = [st * (OC + Wa) / ma, st * (OC - Wa) / ma, ct * (OC + Wc) / mc, ct * (OC - Wc) / mc]

    def dagger(row):
        # (x0 a + x1 a^dag + x2 c + x3 c^dag)^dag
        return [np.conj(row[1]), np.conj(row[0]), np.conj(row[3]), np.conj(row[2])]

    T = np.array([A, dagger(A), C, dagger(C)], dtype=complex)
    Tinv = ETA @ T.conj().T @ ETA
    return BogoliubovMap(T, Tinv, OA, OC, theta)


def cp_mode_projection(W_c, Omega_A, *, W_a=None, max_ratio=1e-2):
    """Near-critical projection ``a_s ~ x (A + A^dag)``, ``c_s ~ -x (A + A^dag)``.

    Returns ``(x_zpf, -x_zpf)``.

    Raises
    ------
    CascadeError
        If the modes are not resonant or ``Omega_A / W_c`` exceeds
        ``max_ratio``.
    """
    if W_a is not None and not math.isclose(W_a, W_c, rel_tol=1e-9):
        raise CascadeError("CP projection", "requires resonant squeezed modes W_a = W_c")
    if not Omega_A > 0:
        raise CascadeError("CP projection", "Omega_A must be positive")
    if Omega_A / W_c > max_ratio:
        raise CascadeError("CP projection",
                           f"Omega_A/W_c = {Omega_A / W_c:.3g} exceeds {max_ratio:g}; not near criticality")
    x = math.sqrt(W_c / (8.0 * Omega_A))
    return x, -x


@dataclass(frozen=True)
class DecayDressedCoeffs:
    a_plus: float
    a_minus: float
    c_plus: float
    c_minus: float
    phi_a_plus: float
    phi_a_minus: float
    phi_c_plus: float
    phi_c_minus: float


def _dressed_magnitudes(W, K, Omega):
    Wt_abs = math.hypot(W, K)
    mag = abs(Omega)
    if mag == 0:
        raise CascadeError("decay-dressed coefficients", "Omega = 0: degenerate normalization")
    cross = 2.0 * (K * Omega.imag - W * Omega.real)
    base = Wt_abs ** 2 + mag ** 2
    den = 2.0 * Wt_abs * mag
    return (base + cross) / den, (base - cross) / den


def _dressed_phases(W, K, Omega):
    Wt = complex(W, -K)
    root = cmath.sqrt(2.0 * Wt * Omega)
    return cmath.phase((Wt + Omega) / root), cmath.phase((Wt - Omega) / root)


def decay_dressed_coeffs(W, K, Omega_A, Omega_C) -> DecayDressedCoeffs:
    """Magnitudes and phases of the non-unitary polariton map with decay.

    Resonant, equal-decay case: ``W~ = W - iK``.  ``Omega_A``/``Omega_C`` are
    the complex branch values to use (e.g. ``-iK`` at the ideal critical
    point).  Magnitudes follow the closed form built from
    ``|W~|^2 + |Omega|^2 +/- 2(K Im Omega - W Re Omega)``; phases are those of
    ``(W~ +/- Omega) / sqrt(2 W~ Omega)`` on the principal branch.
    """
    Omega_A, Omega_C = complex(Omega_A), complex(Omega_C)
    ap, am = _dressed_magnitudes(W, K, Omega_A)
    cp, cm = _dressed_magnitudes(W, K, Omega_C)
    pap, pam = _dressed_phases(W, K, Omega_A)
    pcp, pcm = _dressed_phases(W, K, Omega_C)
    return DecayDressedCoeffs(ap, am, cp, cm, pap, pam, pcp, pcm)


def ideal_cp_coeffs(W, K):
    """``|a_+|`` and both branches of ``|c_+|`` at ``G_sq = W/2`` with decay ``K``.

    Returns ``(a_plus, c_plus_p, c_plus_m)`` where ``c_plus_p`` carries the
    ``3 + 2 sqrt 2`` prefactor.  All three are homogeneous of degree zero in
    ``(W, K)``.
    """
    s = math.sqrt(W ** 2 + K ** 2)
    a_plus = W ** 2 / (2.0 * K * s)
    root = 2.0 * math.sqrt((W ** 2 + K ** 2) * (K ** 2 + 2.0 * W ** 2))
    return a_plus, (3 + 2 * math.sqrt(2)) * W ** 2 / root, (3 - 2 * math.sqrt(2)) * W ** 2 / root


class Stability(str, enum.Enum):
    STABLE = "stable"
    CRITICAL = "critical"
    UNSTABLE = "unstable"


def stability_classify(W_a, W_c, G_sq, K=0.0, *, rtol=1e-14) -> Stability:
    """Classify the squeezed-cavity pair.

    Critical within ``rtol`` of the decay-shifted critical coupling;
    otherwise stable when every eigenvalue of ``i D`` decays (``K > 0``)
    or, without decay, when ``Omega_A^2 > 0``.
    """
    _, G_cp_prime = critical_coupling(W_a, W_c, K)
    if abs(abs(G_sq) - G_cp_prime) <= rtol * G_cp_prime:
        return Stability.CRITICAL
    if K == 0:
        Omega_A_sq, _, _ = polariton_spectrum(W_a, W_c, G_sq)
        return Stability.STABLE if Omega_A_sq > 0 else Stability.UNSTABLE
    growth = dynamical_matrix(QuadraticBosonForm(W_a, W_c, G_sq), K).frequencies().imag.max()
    return Stability.STABLE if growth < 0 else Stability.UNSTABLE

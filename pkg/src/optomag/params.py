"""Physical parameters and the closed-form reduction cascade.

All frequencies, couplings and rates are angular (rad/s) with hbar = 1.
The cascade runs

    drives -> steady state -> linearized couplings G, shifted detunings D'
           -> dispersive coefficients xi, chi, G_ac
           -> squeezing r, squeezed-mode frequencies W, squeezed coupling G_sq
           -> polariton spectrum, critical couplings
           -> LBP zero-point fluctuation and enhanced couplings G_q, G_m
           -> dispersive ratios zeta, effective spin-magnon coupling G_eff

Each stage is a pure function; `derive` chains them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from scipy import constants

from .errors import CascadeError, SteadyStateError

__all__ = [
    "PhysicalParams",
    "Overrides",
    "DerivedParams",
    "RegimeCondition",
    "RegimeReport",
    "RegimeThresholds",
    "detunings",
    "steady_state",
    "steady_state_residual",
    "linearized_couplings",
    "dispersive_coefficients",
    "squeezing_parameters",
    "squeezed_frame",
    "polariton_spectrum",
    "critical_coupling",
    "coupling_for_lbp_frequency",
    "cp_effective_couplings",
    "effective_spin_magnon",
    "estimate_spin_cavity_coupling",
    "validate_regime",
    "derive",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Lab-frame frequencies, couplings, drives and decay rates (rad/s).

    ``K`` is the decay rate shared by the two squeezed cavity modes.
    """

    omega_a: float = 0.0
    omega_c: float = 0.0
    omega_b: float = 0.0
    omega_q: float = 0.0
    omega_m: float = 0.0
    omega_a_d: float = 0.0
    omega_c_d: float = 0.0
    F_a: float = 0.0
    F_c: float = 0.0
    g_a: float = 0.0
    g_c: float = 0.0
    g_q: float = 0.0
    g_m: float = 0.0
    kappa_a: float = 0.0
    kappa_b: float = 0.0
    kappa_c: float = 0.0
    kappa_m: float = 0.0
    gamma_q: float = 0.0
    K: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        for name in ("g_a", "g_c", "g_q", "g_m", "kappa_a", "kappa_b",
                     "kappa_c", "kappa_m", "gamma_q", "K"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class Overrides:
    """Knobs that replace a cascade stage with an explicit value.

    When all four of ``Delta_a_p``, ``Delta_c_p``, ``G_a`` and ``G_c`` are
    given the steady-state solve is skipped.  ``G_sq_over_G_cp`` and
    ``Wc_over_OmegaA`` are alternative ways to place the squeezed-cavity
    coupling near the critical point; at most one may be set.
    ``Delta_q_over_Gq`` / ``Delta_m_over_Gm`` set the spin and magnon
    detunings relative to their enhanced couplings.
    """

    Delta_a_p: float | None = None
    Delta_c_p: float | None = None
    G_a: float | None = None
    G_c: float | None = None
    Delta_q: float | None = None
    Delta_m: float | None = None
    Delta_q_over_Gq: float | None = None
    Delta_m_over_Gm: float | None = None
    G_sq_over_G_cp: float | None = None
    Wc_over_OmegaA: float | None = None
    N_A: float = 0.0

    @property
    def linearized(self):
        given = [v is not None for v in (self.Delta_a_p, self.Delta_c_p, self.G_a, self.G_c)]
        if any(given) and not all(given):
            raise CascadeError("linearized override",
                               "Delta_a_p, Delta_c_p, G_a and G_c must be given together")
        return all(given)


@dataclass(frozen=True)
class DerivedParams:
    """Every intermediate quantity of the reduction cascade.

    Quantities that are undefined for the configuration (e.g. ``x_zpf`` past
    the critical point) are NaN.  ``omega_b``, ``g_q``, ``g_m``, ``kappa_m``,
    ``gamma_q`` and ``K`` are carried over from the physical parameters so
    that Hamiltonian builders need a single argument.
    """

    Delta_a: float
    Delta_c: float
    Delta_q: float
    Delta_m: float
    mean_a: complex
    mean_c: complex
    mean_b: complex
    Delta_a_p: float
    Delta_c_p: float
    G_a: float
    G_c: float
    xi_a_p: float
    xi_a_m: float
    xi_c_p: float
    xi_c_m: float
    G_ac: float
    chi_a: float
    chi_c: float
    r_a: float
    r_c: float
    W_a: float
    W_c: float
    G_sq_cascade: float
    G_sq: float
    theta: float
    Omega_A_sq: float
    Omega_C_sq: float
    Omega_A: float
    Omega_C: float
    G_cp: float
    G_cp_prime: float
    x_zpf: float
    Gq_cp: float
    Gm_cp: float
    zeta_q: float
    zeta_m: float
    G_eff: float
    Delta_q_eff: float
    Delta_m_eff: float
    stark_shift: float
    N_A: float
    omega_b: float
    g_q: float
    g_m: float
    kappa_m: float
    gamma_q: float
    K: float
    G_sq_source: str = "cascade"
    notes: tuple[str, ...] = field(default=())

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# Cascade stages
# ---------------------------------------------------------------------------

def detunings(p: PhysicalParams):
    """Drive-frame detunings ``(Delta_a, Delta_c, Delta_q, Delta_m)``.

    Cavity a and the spin rotate with the a-drive; cavity c and the magnon
    rotate with the c-drive.
    """
    return (p.omega_a - p.omega_a_d,
            p.omega_c - p.omega_c_d,
            p.omega_q - p.omega_a_d,
            p.omega_m - p.omega_c_d)


def _drift_terms(p, Delta_a, Delta_c, alpha, gamma, beta):
    """Individual terms of the deterministic Langevin velocities.

    Returns a list of three tuples (for da/dt, dc/dt, db/dt); each tuple
    holds the additive terms whose sum is the velocity.
    """
    x = 2.0 * beta.real
    return [
        (-(p.kappa_a + 1j * Delta_a) * alpha, -1j * p.g_a * alpha * x, -1j * p.F_a),
        (-(p.kappa_c + 1j * Delta_c) * gamma, 1j * p.g_c * gamma * x, -1j * p.F_c),
        (-(p.kappa_b + 1j * p.omega_b) * beta, -1j * p.g_a * abs(alpha) ** 2,
         1j * p.g_c * abs(gamma) ** 2),
    ]


def steady_state_residual(p: PhysicalParams, mean_a, mean_c, mean_b):
    """Largest velocity magnitude relative to the largest single term."""
    Delta_a, Delta_c, _, _ = detunings(p)
    terms = _drift_terms(p, Delta_a, Delta_c, complex(mean_a), complex(mean_c), complex(mean_b))
    scale = max(abs(t) for eq in terms for t in eq)
    if scale == 0:
        return 0.0
    return max(abs(sum(eq)) for eq in terms) / scale


def steady_state(p: PhysicalParams, *, mixing=0.5, max_iter=10_000, rtol=1e-12):
    """Fixed point ``(mean_a, mean_c, mean_b)`` of the driven mean-field equations.

    Solved by damped iteration on the mechanical amplitude; the cavity
    amplitudes are explicit given ``mean_b``.

    Raises
    ------
    SteadyStateError
        If the iteration does not settle within ``max_iter`` steps, which
        signals a bistable or unstable drive regime.
    """
    if min(p.kappa_a, p.kappa_b, p.kappa_c) <= 0:
        raise CascadeError("steady state", "kappa_a, kappa_b and kappa_c must be > 0")
    Delta_a, Delta_c, _, _ = detunings(p)

    def cavities(beta):
        x = 2.0 * beta.real
        alpha = -1j * p.F_a / (p.kappa_a + 1j * (Delta_a + p.g_a * x))
        gamma = -1j * p.F_c / (p.kappa_c + 1j * (Delta_c - p.g_c * x))
        return alpha, gamma

    beta = 0j
    for _ in range(max_iter):
        alpha, gamma = cavities(beta)
        target = -1j * (p.g_a * abs(alpha) ** 2 - p.g_c * abs(gamma) ** 2) / (p.kappa_b + 1j * p.omega_b)
        beta = (1 - mixing) * beta + mixing * target
        alpha, gamma = cavities(beta)
        if steady_state_residual(p, alpha, gamma, beta) < rtol:
            return complex(alpha), complex(gamma), complex(beta)
    raise SteadyStateError("steady state",
                           f"no convergence after {max_iter} iterations "
                           "(bistable or unstable drive regime); supply G_a, G_c directly")


def linearized_couplings(p: PhysicalParams, mean_a, mean_c, mean_b):
    """Linearized couplings and displacement-shifted detunings.

    Returns ``(G_a, G_c, Delta_a_p, Delta_c_p)``.  Drive phases are absorbed
    so both couplings are real and non-negative.
    """
    Delta_a, Delta_c, _, _ = detunings(p)
    x = 2.0 * complex(mean_b).real
    G_a = abs(p.g_a * mean_a)
    G_c = abs(-p.g_c * mean_c)
    return G_a, G_c, Delta_a + p.g_a * x, Delta_c - p.g_c * x


def dispersive_coefficients(Delta_a_p, Delta_c_p, omega_b, G_a, G_c, *, rtol=1e-12):
    """Mechanical-mode elimination coefficients.

    Returns
    -------
    xi : tuple
        ``(xi_a_plus, xi_a_minus, xi_c_plus, xi_c_minus)`` with
        ``xi_x^(+/-) = -G_x / (Delta_x' +/- omega_b)``.
    G_ac : float
        Mechanically induced cavity-cavity coupling.
    chi_a, chi_c : float
        Coefficients of the induced ``(x^dag + x)^2`` nonlinearity.
    """
    denominators = {
        "Delta_a' + omega_b": Delta_a_p + omega_b,
        "Delta_a' - omega_b": Delta_a_p - omega_b,
        "Delta_c' + omega_b": Delta_c_p + omega_b,
        "Delta_c' - omega_b": Delta_c_p - omega_b,
    }
    scale = max(abs(Delta_a_p), abs(Delta_c_p), abs(omega_b))
    for name, den in denominators.items():
        if abs(den) <= rtol * scale:
            raise CascadeError("dispersive coefficients",
                               f"{name} ~ 0: mechanical resonance, dispersive reduction invalid")
    xa_p = -G_a / (Delta_a_p + omega_b)
    xa_m = -G_a / (Delta_a_p - omega_b)
    xc_p = -G_c / (Delta_c_p + omega_b)
    xc_m = -G_c / (Delta_c_p - omega_b)
    G_ac = 0.5 * (G_a * (xc_p - xc_m) + G_c * (xa_p - xa_m))
    chi_a = G_a * (xa_p - xa_m)
    chi_c = G_c * (xc_p - xc_m)
    return (xa_p, xa_m, xc_p, xc_m), G_ac, chi_a, chi_c


def squeezing_parameters(Delta_a_p, Delta_c_p, chi_a, chi_c):
    """Squeezing parameters ``r_x = ln(1 + 2 chi_x / Delta_x') / 4``."""
    out = []
    for label, D, chi in (("a", Delta_a_p, chi_a), ("c", Delta_c_p, chi_c)):
        if D == 0:
            raise CascadeError("squeezing parameter",
                               f"Delta_{label}' = 0, squeezing frame undefined")
        arg = 1.0 + 2.0 * chi / D
        if arg <= 0:
            raise CascadeError("squeezing parameter",
                               f"1 + 2 chi_{label}/Delta_{label}' = {arg:.6g} <= 0 "
                               f"for cavity {label}; squeezing frame breaks down")
        out.append(0.25 * math.log(arg))
    return tuple(out)


def squeezed_frame(Delta_a_p, Delta_c_p, chi_a, chi_c, r_a, r_c, G_ac):
    """Squeezed-mode frequencies and the exponentially enhanced coupling.

    Returns ``(W_a, W_c, G_sq)`` with ``W = sqrt(D' (D' + chi))`` and
    ``G_sq = G_ac exp(r_a + r_c)``.
    """
    W = []
    for label, D, chi in (("a", Delta_a_p, chi_a), ("c", Delta_c_p, chi_c)):
        rad = D * (D + chi)
        if rad < 0:
            raise CascadeError("squeezed-mode frequency",
                               f"Delta_{label}'(Delta_{label}' + chi_{label}) = {rad:.6g} < 0; "
                               "imaginary squeezed-mode frequency")
        W.append(math.sqrt(rad))
    return W[0], W[1], G_ac * math.exp(r_a + r_c)


def polariton_spectrum(W_a, W_c, G_sq):
    """Squared polariton frequencies and the mixing angle.

    Returns ``(Omega_A_sq, Omega_C_sq, theta)``.  ``Omega_A_sq`` is negative
    beyond the critical point.  It is evaluated through the product of the
    two roots, ``Omega_A^2 Omega_C^2 = W_a W_c (W_a W_c - 4 G^2)``, which
    avoids cancellation close to criticality.
    """
    S = W_a ** 2 + W_c ** 2
    root = math.sqrt((W_a ** 2 - W_c ** 2) ** 2 + 16.0 * G_sq ** 2 * W_a * W_c)
    Omega_C_sq = 0.5 * (S + root)
    if Omega_C_sq > 0:
        Omega_A_sq = W_a * W_c * (W_a * W_c - 4.0 * G_sq ** 2) / Omega_C_sq
    else:
        Omega_A_sq = 0.0
    theta = 0.5 * math.atan2(4.0 * G_sq * math.sqrt(W_a * W_c), W_c ** 2 - W_a ** 2)
    return Omega_A_sq, Omega_C_sq, theta


def critical_coupling(W_a, W_c, K=0.0):
    """Critical couplings without and with the squeezed-mode decay ``K``."""
    G_cp = 0.5 * math.sqrt(W_a * W_c)
    # written as a correction factor so that K = 0 returns G_cp bit for bit
    G_cp_prime = G_cp * math.sqrt((1.0 + (K / W_a) ** 2) * (1.0 + (K / W_c) ** 2))
    return G_cp, G_cp_prime


def coupling_for_lbp_frequency(W_a, W_c, Omega_A):
    """Non-negative ``G_sq`` at which the lower polariton sits at ``Omega_A``.

    Inverts the polariton spectrum:
    ``G^2 = (W_a^2 - Omega_A^2)(W_c^2 - Omega_A^2) / (4 W_a W_c)``.
    """
    if not 0 <= Omega_A <= min(W_a, W_c):
        raise CascadeError("LBP frequency inversion",
                           f"Omega_A = {Omega_A:.6g} outside [0, min(W_a, W_c)]")
    return math.sqrt((W_a ** 2 - Omega_A ** 2) * (W_c ** 2 - Omega_A ** 2) / (4.0 * W_a * W_c))


def cp_effective_couplings(W_c, Omega_A, g_q, g_m, r_a, r_c):
    """LBP zero-point fluctuation and the spin/magnon-LBP couplings.

    Returns ``(x_zpf, Gq_cp, Gm_cp)`` with ``x_zpf = sqrt(W_c / (8 Omega_A))``
    and ``G = g e^r x_zpf / 2``.
    """
    if not Omega_A > 0:
        raise CascadeError("CP projection",
                           f"Omega_A = {Omega_A!r} <= 0: at or beyond criticality, projection undefined")
    x_zpf = math.sqrt(W_c / (8.0 * Omega_A))
    return x_zpf, 0.5 * g_q * math.exp(r_a) * x_zpf, 0.5 * g_m * math.exp(r_c) * x_zpf


def effective_spin_magnon(Gq_cp, Gm_cp, Delta_q, Delta_m, Omega_A, N_A=0.0):
    """Second-order spin-magnon reduction through the virtual LBP.

    Returns ``(zeta_q, zeta_m, G_eff, Delta_q_eff, Delta_m_eff, stark_shift)``.
    Values are returned even when ``|zeta| >= 1``; `validate_regime` flags
    that case.
    """
    for label, D in (("q", Delta_q), ("m", Delta_m)):
        if D == Omega_A:
            raise CascadeError("dispersive ratio",
                               f"Delta_{label} = Omega_A: resonant with the LBP")
    zeta_q = Gq_cp / (Delta_q - Omega_A)
    zeta_m = Gm_cp / (Delta_m - Omega_A)
    G_eff = 0.5 * (Gq_cp * zeta_m + Gm_cp * zeta_q)
    Delta_q_eff = Delta_q + Gq_cp * zeta_q * (2.0 * N_A + 1.0)
    Delta_m_eff = Delta_m + Gm_cp * zeta_m
    return zeta_q, zeta_m, G_eff, Delta_q_eff, Delta_m_eff, 2.0 * Gq_cp * zeta_q


_G_E = abs(constants.physical_constants["electron g factor"][0])


def estimate_spin_cavity_coupling(d, omega_a, L_a):
    """Magnetic-dipole spin-cavity coupling (rad/s) at distance ``d`` (m).

    ``g_q = 2 g_e mu_B B_rms / hbar`` with the field of a wire carrying the
    zero-point current ``I_rms = sqrt(hbar omega_a / (2 L_a))``.
    """
    if d <= 0 or L_a <= 0:
        raise ValueError("d and L_a must be positive")
    i_rms = math.sqrt(constants.hbar * omega_a / (2.0 * L_a))
    b_rms = constants.mu_0 * i_rms / (2.0 * math.pi * d)
    return 2.0 * _G_E * constants.physical_constants["Bohr magneton"][0] * b_rms / constants.hbar


# ---------------------------------------------------------------------------
# Regime diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeThresholds:
    """Numeric stand-ins for the ``>>`` / ``<<`` validity conditions."""

    omega_b_ratio: float = 10.0
    chi_ratio: float = 100.0
    rwa_ratio: float = 10.0
    zeta_max: float = 0.2


@dataclass(frozen=True)
class RegimeCondition:
    name: str
    left: float
    right: float
    margin: float
    passed: bool
    mandatory: bool = True

    def describe(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name:<34s} {self.left:>13.5g} {self.right:>13.5g} {self.margin:>10.4g}  {verdict}"


@dataclass(frozen=True)
class RegimeReport:
    conditions: tuple[RegimeCondition, ...]

    @property
    def ok(self):
        return all(c.passed for c in self.conditions if c.mandatory)

    def failures(self):
        return [c for c in self.conditions if c.mandatory and not c.passed]

    def __getitem__(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def table(self):
        head = f"{'condition':<34s} {'left':>13s} {'right':>13s} {'margin':>10s}  result"
        return "\n".join([head] + [c.describe() for c in self.conditions])


# Relative slack so that a condition sitting exactly on its threshold
# (e.g. G = 0.1 omega_b against ratio 10) is not failed by rounding.
_EDGE = 1e-9


def _much_greater(name, big, small, ratio):
    # big >> small  <=>  big >= ratio * small
    if small == 0:
        margin = math.inf
    else:
        margin = big / (ratio * small)
    return RegimeCondition(name, big, small, margin, margin >= 1 - _EDGE)


def validate_regime(d: DerivedParams, thresholds: RegimeThresholds = RegimeThresholds()):
    """Check every inequality the reduction chain relies on.

    Margins are ``left / (ratio * right)`` for ``>>`` conditions (pass at
    margin >= 1); for sign conditions the margin is the signed value and for
    the zeta bound it is ``zeta_max / |zeta|``.
    """
    t = thresholds
    conds = [
        _much_greater("omega_b >> |Delta_a'|", d.omega_b, abs(d.Delta_a_p), t.omega_b_ratio),
        _much_greater("omega_b >> |Delta_c'|", d.omega_b, abs(d.Delta_c_p), t.omega_b_ratio),
        _much_greater("omega_b >> G_a", d.omega_b, d.G_a, t.omega_b_ratio),
        _much_greater("omega_b >> G_c", d.omega_b, d.G_c, t.omega_b_ratio),
        RegimeCondition("Delta_a' < 0", d.Delta_a_p, 0.0, -d.Delta_a_p, d.Delta_a_p < 0),
        RegimeCondition("Delta_c' < 0", d.Delta_c_p, 0.0, -d.Delta_c_p, d.Delta_c_p < 0),
        _much_greater("|chi_a| >> |Delta_a'|", abs(d.chi_a), abs(d.Delta_a_p), t.chi_ratio),
        _much_greater("|chi_c| >> |Delta_c'|", abs(d.chi_c), abs(d.Delta_c_p), t.chi_ratio),
        _much_greater("Delta_q >> g_q e^r_a / 2", d.Delta_q,
                      0.5 * d.g_q * math.exp(d.r_a), t.rwa_ratio),
        _much_greater("Delta_m >> g_m e^r_c / 2", d.Delta_m,
                      0.5 * d.g_m * math.exp(d.r_c), t.rwa_ratio),
    ]
    for label, z in (("q", d.zeta_q), ("m", d.zeta_m)):
        if math.isnan(z):
            conds.append(RegimeCondition(f"|zeta_{label}| << 1", z, t.zeta_max, math.nan, False))
        else:
            margin = math.inf if z == 0 else t.zeta_max / abs(z)
            conds.append(RegimeCondition(f"|zeta_{label}| << 1", abs(z), t.zeta_max,
                                         margin, abs(z) <= t.zeta_max * (1 + _EDGE)))
    return RegimeReport(tuple(conds))


# ---------------------------------------------------------------------------
# Full cascade
# ---------------------------------------------------------------------------

_NAN = math.nan


def derive(p: PhysicalParams, ov: Overrides = Overrides(), *, strict=True) -> DerivedParams:
    """Run the whole cascade.

    With ``strict=False`` a failure past the polariton spectrum (at or beyond
    criticality) leaves the downstream quantities as NaN and records the
    reason in ``notes`` instead of raising.  Failures in earlier stages
    always raise.
    """
    notes = []
    Delta_a, Delta_c, Delta_q, Delta_m = detunings(p)

    if ov.linearized:
        mean_a = mean_c = mean_b = complex(_NAN, _NAN)
        G_a, G_c, Delta_a_p, Delta_c_p = ov.G_a, ov.G_c, ov.Delta_a_p, ov.Delta_c_p
        if G_a < 0 or G_c < 0:
            raise CascadeError("linearized override", "G_a and G_c must be non-negative")
    elif p.F_a == 0 and p.F_c == 0:
        mean_a = mean_c = mean_b = 0j
        G_a, G_c, Delta_a_p, Delta_c_p = linearized_couplings(p, 0j, 0j, 0j)
    else:
        mean_a, mean_c, mean_b = steady_state(p)
        G_a, G_c, Delta_a_p, Delta_c_p = linearized_couplings(p, mean_a, mean_c, mean_b)

    xi, G_ac, chi_a, chi_c = dispersive_coefficients(Delta_a_p, Delta_c_p, p.omega_b, G_a, G_c)
    r_a, r_c = squeezing_parameters(Delta_a_p, Delta_c_p, chi_a, chi_c)
    W_a, W_c, G_sq_cascade = squeezed_frame(Delta_a_p, Delta_c_p, chi_a, chi_c, r_a, r_c, G_ac)
    G_cp, G_cp_prime = critical_coupling(W_a, W_c, p.K)

    if ov.G_sq_over_G_cp is not None and ov.Wc_over_OmegaA is not None:
        raise CascadeError("G_sq selection", "set only one of G_sq_over_G_cp and Wc_over_OmegaA")
    if ov.Wc_over_OmegaA is not None:
        if ov.Wc_over_OmegaA <= 0:
            raise CascadeError("G_sq selection", "Wc_over_OmegaA must be positive")
        Omega_A = W_c / ov.Wc_over_OmegaA
        G_sq = coupling_for_lbp_frequency(W_a, W_c, Omega_A)
        source = "Wc_over_OmegaA"
    elif ov.G_sq_over_G_cp is not None:
        G_sq = ov.G_sq_over_G_cp * G_cp
        Omega_A = None
        source = "G_sq_over_G_cp"
    else:
        G_sq = G_sq_cascade
        Omega_A = None
        source = "cascade"

    Omega_A_sq, Omega_C_sq, theta = polariton_spectrum(W_a, W_c, G_sq)
    if Omega_A is None:
        Omega_A = math.sqrt(Omega_A_sq) if Omega_A_sq > 0 else _NAN
    else:
        # the configured value is exact; the spectrum is ill-conditioned here
        Omega_A_sq = Omega_A ** 2
    Omega_C = math.sqrt(Omega_C_sq)

    x_zpf = Gq_cp = Gm_cp = _NAN
    zeta_q = zeta_m = G_eff = Delta_q_eff = Delta_m_eff = stark = _NAN
    try:
        x_zpf, Gq_cp, Gm_cp = cp_effective_couplings(W_c, Omega_A, p.g_q, p.g_m, r_a, r_c)
    except CascadeError as exc:
        if strict:
            raise
        notes.append(str(exc))
    else:
        if ov.Delta_q is not None:
            Delta_q = ov.Delta_q
        if ov.Delta_m is not None:
            Delta_m = ov.Delta_m
        if ov.Delta_q_over_Gq is not None:
            Delta_q = ov.Delta_q_over_Gq * Gq_cp
        if ov.Delta_m_over_Gm is not None:
            Delta_m = ov.Delta_m_over_Gm * Gm_cp
        zeta_q, zeta_m, G_eff, Delta_q_eff, Delta_m_eff, stark = effective_spin_magnon(
            Gq_cp, Gm_cp, Delta_q, Delta_m, Omega_A, ov.N_A)

    return DerivedParams(
        Delta_a=Delta_a, Delta_c=Delta_c, Delta_q=Delta_q, Delta_m=Delta_m,
        mean_a=mean_a, mean_c=mean_c, mean_b=mean_b,
        Delta_a_p=Delta_a_p, Delta_c_p=Delta_c_p, G_a=G_a, G_c=G_c,
        xi_a_p=xi[0], xi_a_m=xi[1], xi_c_p=xi[2], xi_c_m=xi[3],
        G_ac=G_ac, chi_a=chi_a, chi_c=chi_c, r_a=r_a, r_c=r_c,
        W_a=W_a, W_c=W_c, G_sq_cascade=G_sq_cascade, G_sq=G_sq, theta=theta,
        Omega_A_sq=Omega_A_sq, Omega_C_sq=Omega_C_sq, Omega_A=Omega_A, Omega_C=Omega_C,
        G_cp=G_cp, G_cp_prime=G_cp_prime, x_zpf=x_zpf, Gq_cp=Gq_cp, Gm_cp=Gm_cp,
        zeta_q=zeta_q, zeta_m=zeta_m, G_eff=G_eff,
        Delta_q_eff=Delta_q_eff, Delta_m_eff=Delta_m_eff, stark_shift=stark,
        N_A=ov.N_A, omega_b=p.omega_b, g_q=p.g_q, g_m=p.g_m,
        kappa_m=p.kappa_m, gamma_q=p.gamma_q, K=p.K,
        G_sq_source=source, notes=tuple(notes),
    )

"""Truncated tensor-product spaces and the Hamiltonians of the reduction chain.

Subsystem order is fixed so that golden matrices are reproducible:

* lab/linearized level: ``(q, a, b, c, m)``; without the mechanics ``(q, a, c, m)``
* polariton level: ``(q, m, A)`` and, with the upper polariton, ``(q, m, A, C)``
* effective level: ``(q, m)``

Two-level basis ordering is ``(|g>, |e>)`` so that ``sigma_-`` has the same
matrix as a two-level bosonic annihilator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .params import DerivedParams
from .quadratic import DecayDressedCoeffs

BOSON = "boson"
TWO_LEVEL = "two-level"


@dataclass(frozen=True)
class Subsystem:
    label: str
    kind: str
    dim: int


class SpaceSpec:
    """Ordered registry of subsystems making up a truncated Hilbert space."""

    def __init__(self, subsystems):
        subs = tuple(subsystems)
        labels = [s.label for s in subs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        for s in subs:
            if s.kind not in (BOSON, TWO_LEVEL):
                raise ValueError(f"unknown subsystem kind {s.kind!r}")
            if s.dim < 2:
                raise ValueError(f"cutoff for {s.label!r} must be >= 2")
            if s.kind == TWO_LEVEL and s.dim != 2:
                raise ValueError("two-level subsystems have dimension 2")
        self.subsystems = subs

    @classmethod
    def build(cls, *entries):
        """``SpaceSpec.build(("q", None), ("a", 5))``: ``None`` marks a two-level system."""
        subs = []
        for label, cutoff in entries:
            if cutoff is None:
                subs.append(Subsystem(label, TWO_LEVEL, 2))
            else:
                subs.append(Subsystem(label, BOSON, int(cutoff)))
        return cls(subs)

    @property
    def labels(self):
        return tuple(s.label for s in self.subsystems)

    @property
    def dims(self):
        return tuple(s.dim for s in self.subsystems)

    @property
    def dim(self):
        return math.prod(self.dims)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"subsystem {label!r} not in space {self.labels}") from None

    def __getitem__(self, label):
        return self.subsystems[self.index(label)]

    def __contains__(self, label):
        return label in self.labels

    def __eq__(self, other):
        return isinstance(other, SpaceSpec) and self.subsystems == other.subsystems

    def __hash__(self):
        return hash(self.subsystems)

    def __repr__(self):
        parts = ", ".join(f"{s.label}:{s.dim}" for s in self.subsystems)
        return f"SpaceSpec({parts})"

    def with_cutoffs(self, **cutoffs):
        """Copy with some bosonic cutoffs replaced."""
        subs = []
        for s in self.subsystems:
            if s.label in cutoffs and s.kind == BOSON:
                subs.append(Subsystem(s.label, BOSON, int(cutoffs[s.label])))
            else:
                subs.append(s)
        return SpaceSpec(subs)

    def basis_index(self, **occupations):
        """Flat index of a product basis state; unnamed subsystems are in ``|0>``."""
        idx = [0] * len(self.subsystems)
        for label, n in occupations.items():
            k = self.index(label)
            if not 0 <= n < self.dims[k]:
                raise ValueError(f"occupation {n} out of range for {label!r}")
            idx[k] = n
        return int(np.ravel_multi_index(idx, self.dims))


class Operator:
    """Dense matrix on a `SpaceSpec`."""

    __array_priority__ = 100

    def __init__(self, data, space: SpaceSpec):
        data = np.asarray(data)
        data = data.astype(complex if np.iscomplexobj(data) else float, copy=False)
        if data.shape != (space.dim, space.dim):
            raise ValueError(f"matrix shape {data.shape} does not match space dimension {space.dim}")
        self.data = data
        self.space = space

    def _coerce(self, other):
        if isinstance(other, Operator):
            if other.space != self.space:
                raise ValueError("operators live on different spaces")
            return other.data
        return other * np.eye(self.space.dim)

    def __add__(self, other):
        return Operator(self.data + self._coerce(other), self.space)

    __radd__ = __add__

    def __sub__(self, other):
        return Operator(self.data - self._coerce(other), self.space)

    def __rsub__(self, other):
        return Operator(self._coerce(other) - self.data, self.space)

    def __neg__(self):
        return Operator(-self.data, self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.data * scalar, self.space)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.space)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.data @ self._coerce(other), self.space)
        return self.data @ other

    def dag(self):
        return Operator(self.data.conj().T, self.space)

    def comm(self, other):
        return self @ other - other @ self

    def norm_max(self):
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def hermiticity_error(self):
        """``max|H - H^dag| / max|H|`` (0 for the zero operator)."""
        scale = self.norm_max()
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T))) / scale

    def is_hermitian(self, rtol=1e-12):
        return self.hermiticity_error() <= rtol

    def expect(self, state):
        if isinstance(state, DensityMatrix):
            return complex(np.trace(self.data @ state.data))
        v = state.data if isinstance(state, StateVector) else np.asarray(state)
        return complex(np.vdot(v, self.data @ v))

    def to_csv(self, path):
        """Golden-matrix dump: one CSV row per matrix row, interleaved re, im."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.data:
                flat = np.empty(2 * len(row))
                flat[0::2] = row.real
                flat[1::2] = row.imag
                w.writerow([format(x, ".17g") for x in flat])

    @classmethod
    def from_csv(cls, path, space):
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(rows[:, 0::2] + 1j * rows[:, 1::2], space)

    def __repr__(self):
        return f"Operator({self.space!r})"


class StateVector:
    def __init__(self, data, space: SpaceSpec, *, atol=1e-12):
        data = np.asarray(data, dtype=complex).reshape(-1)
        if data.shape != (space.dim,):
            raise ValueError("state length does not match space dimension")
        norm = np.linalg.norm(data)
        if abs(norm - 1.0) > atol:
            raise ValueError(f"state norm {norm:.15g} is not 1")
        self.data = data
        self.space = space

    @classmethod
    def basis(cls, space, **occupations):
        v = np.zeros(space.dim, dtype=complex)
        v[space.basis_index(**occupations)] = 1.0
        return cls(v, space)

    def projector(self):
        return DensityMatrix(np.outer(self.data, self.data.conj()), self.space)


class DensityMatrix:
    def __init__(self, data, space: SpaceSpec, *, trace_tol=1e-10, herm_tol=1e-10, eig_floor=-1e-8):
        data = np.asarray(data, dtype=complex)
        if data.shape != (space.dim, space.dim):
            raise ValueError("density matrix shape does not match space dimension")
        if np.max(np.abs(data - data.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(data).real
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr:.15g} is not 1")
        lowest = float(np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0])
        if lowest < eig_floor:
            raise ValueError(f"density matrix has eigenvalue {lowest:.3g} < {eig_floor:g}")
        self.data = data
        self.space = space


# ---------------------------------------------------------------------------
# Elementary operators
# ---------------------------------------------------------------------------

def _lowering(n):
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


_SPIN = {
    "z": np.diag([-1.0, 1.0]),
    "-": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "+": np.array([[0.0, 0.0], [1.0, 0.0]]),
}


def _local(sub, name):
    """Single-subsystem matrix by short name.

    Bosons: ``a``, ``ad``, ``n``, ``x`` (= a + a^dag), ``y`` (= a^dag - a).
    Two-level systems: ``sm``, ``sp``, ``sz``, ``sx`` (= sp + sm), ``sy`` (= sp - sm).
    """
    if sub.kind == TWO_LEVEL:
        table = {"sm": _SPIN["-"], "sp": _SPIN["+"], "sz": _SPIN["z"],
                 "sx": _SPIN["+"] + _SPIN["-"], "sy": _SPIN["+"] - _SPIN["-"]}
    else:
        a = _lowering(sub.dim)
        table = {"a": a, "ad": a.T, "n": a.T @ a, "x": a + a.T, "y": a.T - a}
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"no local operator {name!r} for {sub.kind} subsystem {sub.label!r}") from None


def _kron_term(space, factors):
    """Sparse tensor product of local factors; identity on unnamed subsystems."""
    for label in factors:
        space.index(label)
    out = None
    for sub in space.subsystems:
        m = _local(sub, factors[sub.label]) if sub.label in factors else np.eye(sub.dim)
        m = sparse.csr_matrix(m)
        out = m if out is None else sparse.kron(out, m, format="csr")
    return out


class _Terms:
    """Accumulates ``coefficient * (tensor product)`` terms sparsely."""

    def __init__(self, space):
        self.space = space
        self.acc = sparse.csr_matrix((space.dim, space.dim))

    def add(self, coef, **factors):
        if coef != 0:
            self.acc = self.acc + coef * _kron_term(self.space, factors)
        return self

    def operator(self):
        return Operator(self.acc.toarray(), self.space)


def _embed_sparse(space, label, local):
    k = space.index(label)
    out = None
    for j, d in enumerate(space.dims):
        m = sparse.csr_matrix(local if j == k else np.eye(d))
        out = m if out is None else sparse.kron(out, m, format="csr")
    return out


def _embed(space, label, local):
    return Operator(_embed_sparse(space, label, local).toarray(), space)


def identity(space):
    return Operator(np.eye(space.dim), space)


def ladder(space, label):
    """Annihilation operator of bosonic subsystem ``label``."""
    if space[label].kind != BOSON:
        raise ValueError(f"{label!r} is not a bosonic subsystem")
    return _embed(space, label, _lowering(space[label].dim))


def number(space, label):
    if space[label].kind != BOSON:
        raise ValueError(f"{label!r} is not a bosonic subsystem")
    return _embed(space, label, _local(space[label], "n"))


def pauli(space, label, which):
    """Spin operator ``which`` in ``{"z", "+", "-"}`` of two-level subsystem ``label``."""
    if space[label].kind != TWO_LEVEL:
        raise ValueError(f"{label!r} is not a two-level subsystem")
    if which not in _SPIN:
        raise ValueError(f"unknown spin component {which!r}")
    return _embed(space, label, _SPIN[which])


def _require(space, labels, builder):
    missing = [x for x in labels if x not in space]
    if missing:
        raise KeyError(f"{builder} needs subsystems {missing} in {space!r}")


def default_space(level, cutoff=3):
    """Default space for a Hamiltonian level.

    ``level`` is one of ``"L"``, ``"T"``, ``"squeezed"``, ``"polariton"``,
    ``"decay"``, ``"eff"``.
    """
    if level == "L":
        return SpaceSpec.build(("q", None), ("a", cutoff), ("b", cutoff), ("c", cutoff), ("m", cutoff))
    if level in ("T", "squeezed"):
        return SpaceSpec.build(("q", None), ("a", cutoff), ("c", cutoff), ("m", cutoff))
    if level == "polariton":
        return SpaceSpec.build(("q", None), ("m", cutoff), ("A", cutoff))
    if level == "decay":
        return SpaceSpec.build(("q", None), ("m", cutoff), ("A", cutoff), ("C", cutoff))
    if level == "eff":
        return SpaceSpec.build(("q", None), ("m", cutoff))
    raise ValueError(f"unknown level {level!r}")


# ---------------------------------------------------------------------------
# Hamiltonian levels
# ---------------------------------------------------------------------------

def _free_spin_magnon(t, d):
    return t.add(0.5 * d.Delta_q, q="sz").add(d.Delta_m, m="n")


def _spin_cavity(t, d):
    return t.add(d.g_q, a="ad", q="sm").add(d.g_q, a="a", q="sp")


def _magnon_cavity(t, d):
    return t.add(d.g_m, c="ad", m="a").add(d.g_m, m="ad", c="a")


def build_H_L(d: DerivedParams, space):
    """Linearized optomechanics plus the bare spin and magnon couplings."""
    _require(space, ("q", "a", "b", "c", "m"), "build_H_L")
    t = _Terms(space)
    t.add(d.Delta_a_p, a="n").add(d.omega_b, b="n").add(d.Delta_c_p, c="n")
    t.add(d.G_a, a="x", b="x").add(d.G_c, c="x", b="x")
    _spin_cavity(_free_spin_magnon(t, d), d)
    _magnon_cavity(t, d)
    return t.operator()


def build_H_T(d: DerivedParams, space):
    """Cavities after the mechanical mode has been eliminated."""
    _require(space, ("q", "a", "c", "m"), "build_H_T")
    if "b" in space:
        raise ValueError("build_H_T expects a space without the mechanical mode")
    t = _Terms(space)
    t.add(d.Delta_a_p, a="n").add(d.Delta_c_p, c="n").add(d.G_ac, a="x", c="x")
    # (a + a^dag)^2 as a single local factor keeps the truncation consistent with H_L
    xa2 = _local(space["a"], "x") @ _local(space["a"], "x")
    xc2 = _local(space["c"], "x") @ _local(space["c"], "x")
    t.acc = t.acc + 0.5 * d.chi_a * _embed_sparse(space, "a", xa2) \
        + 0.5 * d.chi_c * _embed_sparse(space, "c", xc2)
    _spin_cavity(_free_spin_magnon(t, d), d)
    _magnon_cavity(t, d)
    return t.operator()


def build_H_squeezed(d: DerivedParams, space, *, keep_antisqueezed=True, rwa=False):
    """Total Hamiltonian in the squeezing representation.

    Subsystems ``a`` and ``c`` stand for the squeezed modes ``a_s``, ``c_s``.
    ``keep_antisqueezed=False`` drops the ``e^{-r}`` corrections; ``rwa=True``
    additionally drops the counter-rotating spin/magnon terms (and implies
    dropping the ``e^{-r}`` terms).
    """
    _require(space, ("q", "a", "c", "m"), "build_H_squeezed")
    t = _Terms(space)
    t.add(d.W_a, a="n").add(d.W_c, c="n").add(d.G_sq, a="x", c="x")
    _free_spin_magnon(t, d)
    up_q = 0.5 * d.g_q * math.exp(d.r_a)
    up_m = 0.5 * d.g_m * math.exp(d.r_c)
    if rwa:
        t.add(up_q, a="ad", q="sm").add(up_q, a="a", q="sp")
        t.add(up_m, c="ad", m="a").add(up_m, c="a", m="ad")
        return t.operator()
    t.add(up_q, a="x", q="sx").add(up_m, c="x", m="x")
    if keep_antisqueezed:
        t.add(-0.5 * d.g_q * math.exp(-d.r_a), a="y", q="sy")
        t.add(-0.5 * d.g_m * math.exp(-d.r_c), c="y", m="y")
    return t.operator()


def build_H_polariton(d: DerivedParams, space):
    """Spin and magnon exchanging excitations with the lower polariton (RWA)."""
    _require(space, ("q", "m", "A"), "build_H_polariton")
    t = _free_spin_magnon(_Terms(space), d)
    t.add(d.Omega_A, A="n")
    t.add(d.Gq_cp, A="ad", q="sm").add(d.Gq_cp, A="a", q="sp")
    t.add(d.Gm_cp, A="ad", m="a").add(d.Gm_cp, A="a", m="ad")
    return t.operator()


def build_H_eff_smp(d: DerivedParams, space):
    """Second-order spin-magnon-polariton Hamiltonian with the Stark terms."""
    _require(space, ("q", "m", "A"), "build_H_eff_smp")
    t = _free_spin_magnon(_Terms(space), d)
    stark_q = d.Gq_cp * d.zeta_q
    stark_m = d.Gm_cp * d.zeta_m
    t.add(d.Omega_A, A="n")
    t.add(stark_q, A="n", q="sz").add(0.5 * stark_q, q="sz")
    t.add(-stark_m, A="n").add(stark_m, m="n")
    t.add(d.G_eff, m="ad", q="sm").add(d.G_eff, m="a", q="sp")
    return t.operator()


def build_H_eff(d: DerivedParams, space):
    """Effective spin-magnon exchange with the LBP replaced by ``N_A``."""
    _require(space, ("q", "m"), "build_H_eff")
    t = _Terms(space)
    t.add(0.5 * d.Delta_q_eff, q="sz").add(d.Delta_m_eff, m="n")
    t.add(d.G_eff, m="ad", q="sm").add(d.G_eff, m="a", q="sp")
    return t.operator()


def build_H_decay_full(d: DerivedParams, coeffs: DecayDressedCoeffs, space, *,
                       Omega_A=None, Omega_C=None):
    """Spin and magnon coupled to both polaritons through decay-dressed coefficients.

    ``Omega_A``/``Omega_C`` default to the cascade's polariton frequencies;
    complex values contribute only their real part (their imaginary parts
    are decay, which belongs in a master equation).
    """
    _require(space, ("q", "m", "A", "C"), "build_H_decay_full")
    OA = d.Omega_A if Omega_A is None else complex(Omega_A).real
    OC = d.Omega_C if Omega_C is None else complex(Omega_C).real
    eq, em = d.g_q * math.exp(d.r_a), d.g_m * math.exp(d.r_c)
    ea, ec = np.exp(1j * coeffs.phi_a_plus), np.exp(1j * coeffs.phi_c_plus)
    t = _free_spin_magnon(_Terms(space), d)
    t.add(OA, A="n").add(OC, C="n")
    for mode, amp in (("A", coeffs.a_plus * ea), ("C", coeffs.c_plus * ec)):
        gq, gm = eq * amp, -em * amp
        t.add(gq, **{mode: "a"}, q="sp").add(np.conj(gq), **{mode: "ad"}, q="sm")
        t.add(gm, **{mode: "a"}, m="ad").add(np.conj(gm), **{mode: "ad"}, m="a")
    return t.operator()


def excitation_number(space):
    """Total excitation number over every subsystem in ``space``."""
    N = 0.0 * identity(space)
    for s in space.subsystems:
        if s.kind == BOSON:
            N = N + number(space, s.label)
        else:
            sp = pauli(space, s.label, "+")
            N = N + sp @ sp.dag()
    return N

"""Named reproduction protocols and parameter sweeps.

Each ``run_*`` function takes a `ScenarioConfig` and returns plain result
objects; writing files is left to `write_*` helpers so the protocols can be
used from scripts and tests without touching the filesystem.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .. import fock
from ..dynamics import LindbladModel, TimeSeries, compare_levels, evolve_density, evolve_state
from ..errors import CascadeError, ConfigError, OptomagError, RegimeError
from ..params import cp_effective_couplings, derive, polariton_spectrum, validate_regime
from ..quadratic import ideal_cp_coeffs, stability_classify
from .config import KEY_KINDS, ScenarioConfig


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return format(value.real, ".17g") + ("+" if value.imag >= 0 or math.isnan(value.imag) else "") \
            + format(value.imag, ".17g") + "j"
    return str(value)


def _write_meta(fh, metadata):
    for key, value in metadata.items():
        fh.write(f"# {key} = {value}\n")


@dataclass
class SweepSeries:
    """Swept variable grid with one row of outputs per point."""

    x_name: str
    x: np.ndarray
    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.size > 1:
            dx = np.diff(self.x)
            if not (np.all(dx > 0) or np.all(dx < 0)):
                raise ValueError("sweep grid must be strictly monotone")
        for name, col in self.columns.items():
            if len(col) != self.x.size:
                raise ValueError(f"column {name!r} has {len(col)} entries, grid has {self.x.size}")

    def __getitem__(self, name):
        return self.columns[name]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            _write_meta(fh, {"x": self.x_name, **self.metadata})
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", *self.columns])
            for i, x in enumerate(self.x):
                w.writerow([_fmt(x), *(_fmt(col[i]) for col in self.columns.values())])


def write_table(path, rows, metadata):
    """Two-column ``quantity,value`` CSV."""
    with open(path, "w", newline="") as fh:
        _write_meta(fh, metadata)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", "value"])
        for key, value in rows.items():
            w.writerow([key, _fmt(value)])


def _meta(cfg, **extra):
    meta = cfg.metadata()
    meta.update({k: _fmt(v) for k, v in extra.items()})
    return meta


# ---------------------------------------------------------------------------
# derive
# ---------------------------------------------------------------------------

_SKIP = {"mean_a", "mean_c", "mean_b", "notes", "G_sq_source"}


def derived_rows(d, report):
    """Flat ``name -> value`` view of a derivation plus its regime checks."""
    rows = {k: v for k, v in d.as_dict().items() if k not in _SKIP}
    for k in ("mean_a", "mean_c", "mean_b"):
        z = getattr(d, k)
        rows[f"{k}_re"], rows[f"{k}_im"] = z.real, z.imag
    rows["G_sq_source"] = d.G_sq_source
    rows["stability"] = stability_classify(d.W_a, d.W_c, d.G_sq, d.K).value
    rows["G_eff_over_kappa_m"] = d.G_eff / d.kappa_m if d.kappa_m > 0 else math.inf
    rows["G_eff_exceeds_kappa_m"] = bool(d.G_eff > d.kappa_m)
    for c in report.conditions:
        rows[f"regime[{c.name}].margin"] = c.margin
        rows[f"regime[{c.name}].pass"] = c.passed
    rows["regime_ok"] = report.ok
    return rows


@dataclass
class DeriveResult:
    derived: object
    report: object
    rows: dict
    metadata: dict

    def table(self):
        d = self.derived
        lines = [f"{'quantity':<22s} value"]
        for k, v in d.as_dict().items():
            if k == "notes":
                continue
            lines.append(f"{k:<22s} {v:.6g}" if isinstance(v, float) else f"{k:<22s} {v}")
        for note in d.notes:
            lines.append(f"note: {note}")
        lines.append("")
        lines.append(self.report.table())
        lines.append("")
        verdict = "yes" if self.rows["G_eff_exceeds_kappa_m"] else "no"
        lines.append(f"G_eff = {d.G_eff:.4g} rad/s vs kappa_m = {d.kappa_m:.4g} rad/s: "
                     f"strong coupling {verdict}")
        return "\n".join(lines)


def run_derive(cfg: ScenarioConfig, *, strict=True):
    d = derive(cfg.physical(), cfg.overrides(), strict=strict)
    report = validate_regime(d, cfg.thresholds())
    return DeriveResult(d, report, derived_rows(d, report), _meta(cfg))


# ---------------------------------------------------------------------------
# fig2: linearized vs mechanics-eliminated cavities
# ---------------------------------------------------------------------------

@dataclass
class Fig2Result:
    linearized: TimeSeries
    eliminated: TimeSeries
    deviation: dict
    convergence: dict | None
    metadata: dict


def _fig2_spaces(cfg, scale=1):
    ca, cb, cc = (scale * cfg.get(k) for k in ("cutoff_a", "cutoff_b", "cutoff_c"))
    cm = cfg.get("cutoff_m_fig2")
    space_L = fock.SpaceSpec.build(("q", None), ("a", ca), ("b", cb), ("c", cc), ("m", cm))
    space_T = fock.SpaceSpec.build(("q", None), ("a", ca), ("c", cc), ("m", cm))
    return space_L, space_T


def fig2_window(d, periods):
    """``periods`` exchange periods ``pi/|G_ac|`` (falls back to the mechanics)."""
    rate = abs(d.G_ac) or d.omega_b or abs(d.Delta_a_p)
    if not rate:
        raise ConfigError("fig2: no nonzero frequency sets the time window")
    return periods * math.pi / rate


def _fig2_pair(d, cfg, grid, scale):
    space_L, space_T = _fig2_spaces(cfg, scale)
    n0 = cfg.get("fig2_photons")
    obs = ("n_a", "n_c")
    ts_L = evolve_state(fock.build_H_L(d, space_L), fock.StateVector.basis(space_L, a=n0), grid, obs)
    ts_T = evolve_state(fock.build_H_T(d, space_T), fock.StateVector.basis(space_T, a=n0), grid, obs)
    return ts_L, ts_T


def run_fig2(cfg: ScenarioConfig, *, check_convergence=False, replace=None):
    """Photon numbers under the linearized and the mechanics-eliminated Hamiltonians.

    ``replace`` updates the resolved parameters (e.g. halved ``G_a``, ``G_c``)
    while keeping the time grid of the unmodified configuration.
    """
    d0 = derive(cfg.physical(), cfg.overrides(), strict=False)
    T = fig2_window(d0, cfg.get("fig2_periods"))
    grid = np.linspace(0.0, T, cfg.get("fig2_points"))
    d = d0 if not replace else derive(cfg.physical(), cfg.overrides(**replace), strict=False)
    ts_L, ts_T = _fig2_pair(d, cfg, grid, 1)
    dev = compare_levels(ts_L, ts_T)
    conv = None
    if check_convergence:
        ts_L2, ts_T2 = _fig2_pair(d, cfg, grid, 2)
        conv = {}
        for tag, a, b in (("H_L", ts_L, ts_L2), ("H_T", ts_T, ts_T2)):
            for name, dv in compare_levels(a, b).items():
                conv[f"{tag}:{name}"] = dv.max
    meta = _meta(cfg, window_s=T, G_ac=d.G_ac)
    for ts, level in ((ts_L, "H_L"), (ts_T, "H_T")):
        ts.metadata = {**meta, "level": level, **ts.metadata}
    return Fig2Result(ts_L, ts_T, dev, conv, meta)


def fig2_summary(res: Fig2Result, tol):
    rows = {}
    for name, dv in res.deviation.items():
        rows[f"max_dev_{name}"] = dv.max
        rows[f"rms_dev_{name}"] = dv.rms
    if res.convergence is not None:
        for name, v in res.convergence.items():
            rows[f"cutoff_doubling_change[{name}]"] = v
        worst = max(res.convergence.values())
        rows["cutoff_doubling_max_change"] = worst
        rows["cutoff_converged"] = worst <= tol
    return rows


# ---------------------------------------------------------------------------
# fig3: polariton spectrum across the critical point
# ---------------------------------------------------------------------------

def _zero_crossing(x, y):
    y = np.asarray(y)
    hits = np.flatnonzero(y == 0)
    if hits.size:
        return float(x[hits[0]])
    idx = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if not idx.size:
        return math.nan
    i = idx[0]
    return float(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))


def run_fig3(cfg: ScenarioConfig):
    """``Omega_A^2``, ``Omega_C^2`` in units of ``W_c^2`` against ``G_sq / W_c``."""
    ratio = cfg.get("fig3_Wa_over_Wc")
    K = cfg.get("fig3_K_over_Wc")
    if ratio <= 0:
        raise ConfigError("fig3_Wa_over_Wc must be positive")
    x = np.linspace(0.0, cfg.get("fig3_max"), cfg.get("fig3_points"))
    OA, OC, cls = [], [], []
    for g in x:
        a2, c2, _ = polariton_spectrum(ratio, 1.0, g)
        OA.append(a2)
        OC.append(c2)
        cls.append(stability_classify(ratio, 1.0, g, K).value)
    G_cp = 0.5 * math.sqrt(ratio)
    crossing = _zero_crossing(x, OA)
    meta = _meta(cfg, G_cp_over_Wc=G_cp, crossing_G_sq_over_Wc=crossing)
    return SweepSeries("G_sq/W_c", x, {"Omega_A_sq": OA, "Omega_C_sq": OC, "stability": cls}, meta)


# ---------------------------------------------------------------------------
# fig4: enhancement of the spin-LBP coupling
# ---------------------------------------------------------------------------

FIG4_R = (1.0, 2.0, 3.0)


def run_fig4(cfg: ScenarioConfig):
    """``|G_q / g_q|`` against ``Omega_A / W_c`` for squeezing parameters 1, 2, 3."""
    lo = cfg.get("fig4_min")
    if not 0 < lo < 1:
        raise ConfigError("fig4_min must lie in (0, 1)")
    x = np.logspace(math.log10(lo), 0.0, cfg.get("fig4_points"))
    cols = {}
    for r in FIG4_R:
        cols[f"ratio_r{r:g}"] = [cp_effective_couplings(1.0, xi, 1.0, 1.0, r, r)[1] for xi in x]
    return SweepSeries("Omega_A/W_c", x, cols, _meta(cfg))


# ---------------------------------------------------------------------------
# fig5: spin-magnon vacuum Rabi oscillation
# ---------------------------------------------------------------------------

@dataclass
class Fig5Result:
    derived: object
    report: object
    polariton: TimeSeries
    smp: TimeSeries
    effective: TimeSeries
    open: TimeSeries
    summary: dict
    metadata: dict


def first_minimum_time(t, y):
    """Time of the first interior local minimum, refined by a parabola."""
    idx, _ = find_peaks(-np.asarray(y))
    if not idx.size:
        return math.nan
    i = idx[0]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    return float(t[i] + shift * (t[i + 1] - t[i]))


def exchange_time(H, psi0):
    """Half-period ``pi / |E_1 - E_2|`` of the two eigenstates with most weight in ``psi0``.

    Unlike a minimum search this ignores the small fast oscillation that a
    weakly excited mediator mode superimposes on the population exchange.
    """
    evals, evecs = np.linalg.eigh(H.data)
    weight = np.abs(evecs.conj().T @ psi0.data) ** 2
    i, j = np.argsort(weight)[-2:]
    return math.pi / abs(evals[i] - evals[j])


def oscillation_maxima(y):
    """Initial value followed by every interior local maximum."""
    idx, _ = find_peaks(np.asarray(y))
    return [float(y[0])] + [float(y[i]) for i in idx]


def run_fig5(cfg: ScenarioConfig, *, force=False):
    # the initial state has no LBP excitation
    d = derive(cfg.physical(), cfg.overrides(N_A=0.0))
    report = validate_regime(d, cfg.thresholds())
    if not report.ok and not force:
        raise RegimeError(report)
    if not d.G_eff > 0:
        raise CascadeError("fig5 window", "G_eff must be positive to set the time window")
    T = cfg.get("fig5_periods") * math.pi / d.G_eff
    grid = np.linspace(0.0, T, cfg.get("fig5_points"))
    cm, cA = cfg.get("cutoff_m"), cfg.get("cutoff_A")

    s3 = fock.SpaceSpec.build(("q", None), ("m", cm), ("A", cA))
    s2 = fock.SpaceSpec.build(("q", None), ("m", cm))
    psi3 = fock.StateVector.basis(s3, q=1)
    psi2 = fock.StateVector.basis(s2, q=1)
    obs3 = ("sigma_z", "p_e", "n_m", "n_A")
    obs2 = ("sigma_z", "p_e", "n_m")
    H26 = fock.build_H_polariton(d, s3)
    ts26 = evolve_state(H26, psi3, grid, obs3)
    ts30 = evolve_state(fock.build_H_eff_smp(d, s3), psi3, grid, obs3)
    H31 = fock.build_H_eff(d, s2)
    ts31 = evolve_state(H31, psi2, grid, obs2)
    model = LindbladModel(H31, [(fock.ladder(s2, "m"), d.kappa_m),
                                (fock.pauli(s2, "q", "-"), d.gamma_q)])
    ts_open = evolve_density(model, psi2.projector(), grid, obs2)

    ideal = math.pi / (2.0 * d.G_eff)
    pops = ("p_e", "n_m")
    dev30 = compare_levels(ts26, ts30, pops)
    dev31 = compare_levels(ts26, ts31, pops)
    maxima = oscillation_maxima(ts_open["p_e"])
    t30 = first_minimum_time(grid, ts30["p_e"])
    t26 = exchange_time(H26, psi3)
    summary = {
        "G_eff": d.G_eff,
        "ideal_transfer_time": ideal,
        "transfer_time_smp": t30,
        "transfer_time_smp_rel_error": t30 / ideal - 1.0,
        "transfer_time_polariton": t26,
        "transfer_time_polariton_rel_error": t26 / ideal - 1.0,
        "max_dev_pe_polariton_vs_smp": dev30["p_e"].max,
        "max_dev_nm_polariton_vs_smp": dev30["n_m"].max,
        "max_dev_pe_polariton_vs_eff": dev31["p_e"].max,
        "max_dev_nm_polariton_vs_eff": dev31["n_m"].max,
        "max_nA_polariton": float(ts26["n_A"].max()),
        "max_nA_smp": float(ts30["n_A"].max()),
        "lbp_threshold": cfg.get("lbp_threshold"),
        "lbp_below_threshold": bool(max(ts26["n_A"].max(), ts30["n_A"].max()) <= cfg.get("lbp_threshold")),
        "open_maxima": " ".join(format(m, ".6g") for m in maxima),
        "open_maxima_decreasing": bool(len(maxima) > 1 and np.all(np.diff(maxima) < 0)),
        "regime_ok": report.ok,
        "forced": bool(force and not report.ok),
    }
    meta = _meta(cfg, N_A_used=0.0, window_s=T)
    for ts, level in ((ts26, "polariton"), (ts30, "spin-magnon-polariton"),
                      (ts31, "effective"), (ts_open, "effective+dissipation")):
        ts.metadata = {**meta, "level": level, **ts.metadata}
    return Fig5Result(d, report, ts26, ts30, ts31, ts_open, summary, meta)


# ---------------------------------------------------------------------------
# appendix-c: decay-dressed coefficients at the critical point
# ---------------------------------------------------------------------------

def run_appendix_c(cfg: ScenarioConfig):
    lo, hi = cfg.get("appc_min"), cfg.get("appc_max")
    if not 0 < lo < hi:
        raise ConfigError("appc_min and appc_max must satisfy 0 < min < max")
    x = np.logspace(math.log10(lo), math.log10(hi), cfg.get("appc_points"))
    rows = [ideal_cp_coeffs(w, 1.0) for w in x]
    cols = {
        "a_plus": [r[0] for r in rows],
        "c_plus_p": [r[1] for r in rows],
        "c_plus_m": [r[2] for r in rows],
    }
    return SweepSeries("W/K", x, cols, _meta(cfg))


# ---------------------------------------------------------------------------
# Generic sweep
# ---------------------------------------------------------------------------

def parse_range(text):
    """``start:stop:n`` -> ``numpy.linspace(start, stop, n)``."""
    try:
        start, stop, n = text.split(":")
        start, stop, n = float(start), float(stop), int(n)
    except ValueError:
        raise ConfigError(f"--range expects start:stop:n, got {text!r}") from None
    if n < 1:
        raise ConfigError("--range needs at least one point")
    if n > 1 and start == stop:
        raise ConfigError("--range start and stop must differ for more than one point")
    return np.linspace(start, stop, n)


def _sweep_point(args):
    cfg, var, text = args
    cfg = cfg.copy()
    try:
        cfg.assign(var, text)
        res = run_derive(cfg, strict=False)
        return res.rows, ""
    except OptomagError as exc:
        return None, str(exc).replace("\n", " ")
    except ValueError as exc:
        return None, f"{type(exc).__name__}: {exc}".replace("\n", " ")


def run_sweep(cfg: ScenarioConfig, var, values, *, workers=1):
    """Evaluate the cascade at each value of ``var`` (given in config units)."""
    if var not in KEY_KINDS:
        raise ConfigError(f"unknown sweep variable {var!r}")
    kind = KEY_KINDS[var]
    texts = [str(int(round(v))) if kind == "int" else repr(float(v)) for v in values]
    jobs = [(cfg, var, t) for t in texts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    names = []
    for rows, _ in results:
        if rows is not None:
            names = list(rows)
            break
    cols = {n: [] for n in names}
    cols["error"] = []
    for rows, err in results:
        for n in names:
            cols[n].append(rows[n] if rows is not None else math.nan)
        cols["error"].append(err)
    return SweepSeries(var, np.asarray(values, dtype=float), cols, _meta(cfg))

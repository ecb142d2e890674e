"""Configuration parsing, the figure protocols, sweeps and the command line."""

import math

import numpy as np
import pytest

from conftest import TWO_PI
from optomag.errors import ConfigError, RegimeError
from optomag.scenarios import cli
from optomag.scenarios import protocols as pr
from optomag.scenarios.config import builtin_names, load_config, parse_lines


def _cfg(*sets, name=None):
    return load_config(name, list(sets))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_frequencies_given_in_hz():
    cfg = parse_lines(["omega_b = 1e9  # mechanics", "", "# comment only", "N_A = 2"])
    assert cfg.values["omega_b"] == TWO_PI * 1e9
    assert cfg.values["N_A"] == 2.0
    assert cfg.text["omega_b"] == "1e9"


@pytest.mark.parametrize("lines,match", [
    (["no_such_key = 1"], "unknown"),
    (["omega_b 1e9"], "expected"),
    (["omega_b = fast"], "cannot parse"),
    (["cutoff_a = 2.5"], "integer"),
    (["g_q = inf"], "finite"),
])
def test_bad_lines_rejected_with_location(lines, match):
    with pytest.raises(ConfigError, match=match) as info:
        parse_lines(["omega_b = 1e9"] + lines, source="x.cfg")
    assert "x.cfg:2" in str(info.value)


def test_last_placement_key_wins():
    cfg = parse_lines(["Wc_over_OmegaA = 1e6", "G_sq_over_G_cp = 0.5"])
    assert "Wc_over_OmegaA" not in cfg.values
    cfg = load_config(None, ["G_sq_over_G_cp=0.5", "Wc_over_OmegaA=100"])
    assert cfg.values["Wc_over_OmegaA"] == 100 and "G_sq_over_G_cp" not in cfg.values


def test_set_overrides_file_values():
    cfg = _cfg("g_q=3e4")
    assert cfg.values["g_q"] == TWO_PI * 3e4
    with pytest.raises(ConfigError):
        _cfg("g_q")


def test_builtin_configs_resolve():
    assert {"strong_coupling", "fig3_blueshift", "fig3_redshift"} <= set(builtin_names())
    with pytest.raises(ConfigError, match="neither"):
        load_config("does_not_exist")


def test_config_file_path(tmp_path):
    p = tmp_path / "mine.cfg"
    p.write_text("omega_b = 2e9\n", encoding="utf-8")
    cfg = load_config(str(p))
    assert cfg.source == str(p) and cfg.values["omega_b"] == TWO_PI * 2e9


def test_invalid_physical_value_is_config_error():
    with pytest.raises(ConfigError):
        pr.run_derive(_cfg("kappa_m=-1"))


# ---------------------------------------------------------------------------
# derive
# ---------------------------------------------------------------------------

def test_derive_reference_rows():
    res = pr.run_derive(_cfg())
    rows = res.rows
    assert rows["chi_a"] == pytest.approx(-1.2566370614371739e8, rel=1e-12)
    assert rows["x_zpf"] == pytest.approx(353.55339059327376, rel=1e-12)
    assert rows["G_eff"] == pytest.approx(31416122.892491874, rel=1e-12)
    assert rows["G_eff_exceeds_kappa_m"] is True
    assert rows["G_eff_over_kappa_m"] == pytest.approx(5.0000312511225344, rel=1e-12)
    assert rows["regime_ok"] is True
    assert rows["stability"] == "stable"
    assert "strong coupling yes" in res.table()


def test_zero_drives_switch_off_enhancement():
    rows = pr.run_derive(_cfg("G_a=0", "G_c=0"), strict=False).rows
    assert rows["G_ac"] == 0 and rows["chi_a"] == 0 and rows["chi_c"] == 0
    assert rows["r_a"] == 0 and rows["r_c"] == 0
    assert rows["Gq_cp"] == pytest.approx(0.5 * rows["g_q"] * rows["x_zpf"], rel=1e-14)


def test_near_threshold_placement():
    rows = pr.run_derive(_cfg("G_sq_over_G_cp=0.999999")).rows
    assert rows["Omega_A"] / rows["W_c"] == pytest.approx(1e-3, rel=1e-6)
    assert rows["G_sq_source"] == "G_sq_over_G_cp"


def test_derive_csv(tmp_path):
    res = pr.run_derive(_cfg())
    path = tmp_path / "d.csv"
    pr.write_table(path, res.rows, res.metadata)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config = builtin:strong_coupling"
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header == "quantity,value"
    assert "G_eff_exceeds_kappa_m,true" in lines


# ---------------------------------------------------------------------------
# figure protocols
# ---------------------------------------------------------------------------

def test_fig2_initial_condition_and_decoupled_limit():
    base = ("cutoff_a=3", "cutoff_b=3", "cutoff_c=3", "fig2_points=21")
    res = pr.run_fig2(_cfg(*base))
    for ts in (res.linearized, res.eliminated):
        assert ts["n_a"][0] == pytest.approx(1.0, abs=1e-14)
        assert ts["n_c"][0] == pytest.approx(0.0, abs=1e-14)
    undriven = pr.run_fig2(_cfg(*base), replace=dict(G_a=0.0, G_c=0.0))
    assert np.array_equal(undriven.linearized.t, res.linearized.t)
    # only the far-detuned spin exchange is left, bounded by 4 (g_q / Delta_q)^2
    d = pr.run_derive(_cfg(*base, "G_a=0", "G_c=0"), strict=False).derived
    bound = 4 * (d.g_q / (d.Delta_q - d.Delta_a_p)) ** 2
    for ts in (undriven.linearized, undriven.eliminated):
        assert np.max(np.abs(ts["n_a"] - 1.0)) <= 1.01 * bound
    flat = pr.run_fig2(_cfg(*base, "g_q=0", "g_m=0"), replace=dict(G_a=0.0, G_c=0.0))
    for ts in (flat.linearized, flat.eliminated):
        assert np.max(np.abs(ts["n_a"] - 1.0)) <= 1e-8
        assert np.max(np.abs(ts["n_c"])) <= 1e-8


def test_fig2_window_spans_exchange_periods(ref_params):
    assert pr.fig2_window(ref_params, 5.0) == pytest.approx(5 * math.pi / abs(ref_params.G_ac), rel=1e-15)


def test_fig3_crossings():
    for name, expected in (("strong_coupling", 0.5), ("fig3_blueshift", 1.0), ("fig3_redshift", 0.05)):
        s = pr.run_fig3(load_config(name))
        assert float(s.metadata["crossing_G_sq_over_Wc"]) == pytest.approx(expected, rel=1e-12)


def test_fig3_uncoupled_and_classified():
    s = pr.run_fig3(_cfg())
    assert s.x[0] == 0.0
    assert s["Omega_A_sq"][0] == pytest.approx(1.0) and s["Omega_C_sq"][0] == pytest.approx(1.0)
    cls = list(s["stability"])
    assert cls[0] == "stable" and cls[-1] == "unstable"
    assert "critical" in cls


def test_fig4_enhancement():
    s = pr.run_fig4(_cfg())
    ratio = np.asarray(s["ratio_r3"]) / np.asarray(s["ratio_r2"])
    assert np.max(np.abs(ratio - math.e)) <= 1e-12
    # r = 1 at Omega_A = 1e-6 W_c
    assert s["ratio_r1"][0] == pytest.approx(0.5 * math.e * math.sqrt(1e6 / 8), rel=1e-12)


def test_fig4_formula_points():
    from optomag.params import cp_effective_couplings
    assert cp_effective_couplings(1.0, 1 / 8, 1.0, 1.0, 0.0, 0.0)[1] == pytest.approx(0.5, rel=1e-15)
    ratio = cp_effective_couplings(1.0, 1e-6, 1.0, 1.0, 2.6491649331961446, 0.0)[1]
    assert ratio == pytest.approx(2500.0, rel=0.01)


def test_fig5_refuses_outside_regime():
    cfg = _cfg("Delta_q_over_Gq=2", "Delta_m_over_Gm=2")
    with pytest.raises(RegimeError):
        pr.run_fig5(cfg)


def test_appendix_c_columns():
    s = pr.run_appendix_c(_cfg("appc_min=1", "appc_max=100", "appc_points=3"))
    assert s.x[0] == 1.0
    assert s["a_plus"][0] == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-12)
    assert s["c_plus_p"][0] > s["c_plus_m"][0]
    with pytest.raises(ConfigError):
        pr.run_appendix_c(_cfg("appc_min=2", "appc_max=1"))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text,ok", [("0:1:5", True), ("1:1:1", True), ("0:1", False),
                                     ("0:1:0", False), ("1:1:3", False)])
def test_parse_range(text, ok):
    if ok:
        assert pr.parse_range(text).size >= 1
    else:
        with pytest.raises(ConfigError):
            pr.parse_range(text)


def test_sweep_decay_raises_shifted_critical_coupling():
    s = pr.run_sweep(_cfg(), "K", np.linspace(0, 2e5, 11))
    col = np.asarray(s["G_cp_prime"])
    assert np.all(np.diff(col) >= 0) and col[-1] > col[0]


def test_sweep_through_criticality_flips_classification():
    s = pr.run_sweep(_cfg(), "G_sq_over_G_cp", np.linspace(0.5, 1.5, 11))
    cls = list(s["stability"])
    assert cls[0] == "stable" and cls[-1] == "unstable"
    first_bad = cls.index("unstable")
    assert all(c == "unstable" for c in cls[first_bad:])
    assert all(e == "" for e in s["error"][:first_bad])


def test_single_point_sweep_equals_derive():
    cfg = _cfg()
    s = pr.run_sweep(cfg, "g_q", [2e4])
    rows = pr.run_derive(cfg).rows
    for k, v in rows.items():
        got = s[k][0]
        if isinstance(v, float) and math.isnan(v):
            assert math.isnan(got)
        else:
            assert got == v, k


def test_parallel_sweep_matches_serial():
    values = np.linspace(1e4, 3e4, 4)
    a = pr.run_sweep(_cfg(), "g_q", values)
    b = pr.run_sweep(_cfg(), "g_q", values, workers=2)
    np.testing.assert_equal(a.columns, b.columns)


def test_sweep_records_point_failures():
    s = pr.run_sweep(_cfg(), "kappa_m", [-1.0, 1e6])
    assert s["error"][0] and not s["error"][1]
    assert math.isnan(s["G_eff"][0]) and s["G_eff"][1] > 0


def test_sweep_rejects_unknown_variable():
    with pytest.raises(ConfigError):
        pr.run_sweep(_cfg(), "nonsense", [1.0])


def test_sweep_grid_must_be_monotone():
    with pytest.raises(ValueError):
        pr.SweepSeries("x", [0.0, 1.0, 0.5], {"y": [1, 2, 3]})


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def test_cli_derive_writes_csv(tmp_path, capsys):
    assert _run(tmp_path, "derive") == cli.EXIT_OK
    assert (tmp_path / "derive.csv").is_file()
    assert "strong coupling yes" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path):
    assert _run(tmp_path, "derive", "--set", "bogus=1") == cli.EXIT_CONFIG
    assert _run(tmp_path, "derive", "--config", "missing") == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        cli.main(["nope"])
    assert info.value.code == 2


def test_cli_regime_abort_and_force(tmp_path, capsys):
    code = _run(tmp_path, "fig5", "--set", "Delta_q_over_Gq=2", "--set", "Delta_m_over_Gm=2")
    assert code == cli.EXIT_REGIME
    assert "--force" in capsys.readouterr().err
    code = _run(tmp_path, "fig5", "--force", "--set", "Delta_q_over_Gq=2",
                "--set", "Delta_m_over_Gm=2", "--set", "fig5_points=51")
    assert code == cli.EXIT_OK
    assert "forced,true" in (tmp_path / "fig5_summary.csv").read_text()


def test_cli_numerical_failure_exit_code(tmp_path):
    # beyond criticality the LBP frequency is imaginary and the cascade stops
    assert _run(tmp_path, "derive", "--set", "G_sq_over_G_cp=1.5") == cli.EXIT_NUMERICAL


def test_cli_outputs_are_reproducible(tmp_path):
    for sub in ("a", "b"):
        assert cli.main(["fig4", "--out", str(tmp_path / sub)]) == 0
        assert cli.main(["sweep", "--var", "K", "--range", "0:1e5:3",
                         "--out", str(tmp_path / sub)]) == 0
    for name in ("fig4.csv", "sweep_K.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_metadata_header(tmp_path):
    assert _run(tmp_path, "fig3", "--set", "fig3_points=11") == 0
    lines = (tmp_path / "fig3.csv").read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert any(ln.startswith("# fig3_points = 11") for ln in meta)
    assert any(ln.startswith("# omega_b = ") for ln in meta)
    assert any(ln.startswith("# cutoff_a = ") for ln in meta)
    assert lines[len(meta)].startswith("x,")


def test_cli_lists_configs(capsys):
    assert cli.main(["configs"]) == 0
    assert "strong_coupling" in capsys.readouterr().out

"""Scenario configuration: ``key = value`` text files plus command-line overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..params import Overrides, PhysicalParams, RegimeThresholds

TWO_PI = 2.0 * math.pi

# kind: "hz" values are ordinary frequencies converted to rad/s; "ratio" are
# dimensionless floats; "int" are integers.
_PHYSICAL = {name: "hz" for name in PhysicalParams.__dataclass_fields__}
_OVERRIDES = {
    "Delta_a_p": "hz", "Delta_c_p": "hz", "G_a": "hz", "G_c": "hz",
    "Delta_q": "hz", "Delta_m": "hz",
    "Delta_q_over_Gq": "ratio", "Delta_m_over_Gm": "ratio",
    "G_sq_over_G_cp": "ratio", "Wc_over_OmegaA": "ratio", "N_A": "ratio",
}
_THRESHOLDS = {name: "ratio" for name in RegimeThresholds.__dataclass_fields__}

# scenario settings with their defaults
SCENARIO_DEFAULTS = {
    "cutoff_a": ("int", 5),
    "cutoff_b": ("int", 5),
    "cutoff_c": ("int", 5),
    "cutoff_m_fig2": ("int", 2),
    "cutoff_m": ("int", 3),
    "cutoff_A": ("int", 3),
    "fig2_photons": ("int", 1),
    "fig2_periods": ("ratio", 5.0),
    "fig2_points": ("int", 201),
    "convergence_tol": ("ratio", 1e-3),
    "fig3_Wa_over_Wc": ("ratio", 1.0),
    "fig3_K_over_Wc": ("ratio", 0.0),
    "fig3_max": ("ratio", 1.0),
    "fig3_points": ("int", 201),
    "fig4_min": ("ratio", 1e-6),
    "fig4_points": ("int", 121),
    "fig5_periods": ("ratio", 3.0),
    "fig5_points": ("int", 601),
    "lbp_threshold": ("ratio", 0.05),
    "appc_min": ("ratio", 1e-2),
    "appc_max": ("ratio", 1e2),
    "appc_points": ("int", 101),
}

KEY_KINDS = {**_PHYSICAL, **_OVERRIDES, **_THRESHOLDS,
             **{k: kind for k, (kind, _) in SCENARIO_DEFAULTS.items()}}

# the two ways of placing G_sq near the critical point are mutually exclusive;
# the one assigned last wins
_G_SQ_KEYS = ("G_sq_over_G_cp", "Wc_over_OmegaA")

BUILTIN_DIR = "configs"


def _convert(key, text):
    kind = KEY_KINDS.get(key)
    if kind is None:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        if kind == "int":
            value = int(text)
        else:
            value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {'an integer' if kind == 'int' else 'a number'}") from None
    if kind != "int" and not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite")
    return value * TWO_PI if kind == "hz" else value


@dataclass
class ScenarioConfig:
    """Resolved parameter assignments in SI units (rad/s for frequencies).

    ``text`` keeps the values exactly as written (Hz for frequencies), which
    is what metadata headers echo back.
    """

    values: dict = field(default_factory=dict)
    text: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def assign(self, key, raw):
        key = key.strip()
        raw = raw.strip()
        value = _convert(key, raw)
        if key in _G_SQ_KEYS:
            for other in _G_SQ_KEYS:
                self.values.pop(other, None)
                self.text.pop(other, None)
        self.values[key] = value
        self.text[key] = raw

    def copy(self):
        return ScenarioConfig(dict(self.values), dict(self.text), self.source)

    def get(self, key):
        if key in self.values:
            return self.values[key]
        if key in SCENARIO_DEFAULTS:
            return SCENARIO_DEFAULTS[key][1]
        if key in _THRESHOLDS:
            return getattr(RegimeThresholds(), key)
        if key in _PHYSICAL:
            return 0.0
        if key == "N_A":
            return 0.0
        return None

    def physical(self):
        try:
            return PhysicalParams(**{k: self.values[k] for k in _PHYSICAL if k in self.values})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def overrides(self, **replace):
        kw = {k: self.values[k] for k in _OVERRIDES if k in self.values}
        kw.update(replace)
        return Overrides(**kw)

    def thresholds(self):
        return RegimeThresholds(**{k: self.values[k] for k in _THRESHOLDS if k in self.values})

    def metadata(self):
        """Every assignment as written plus the defaults that were used."""
        meta = {"config": self.source}
        for key in KEY_KINDS:
            if key in self.text:
                meta[key] = self.text[key]
        for key, (_, default) in SCENARIO_DEFAULTS.items():
            meta.setdefault(key, repr(default))
        return meta


def parse_lines(lines, cfg=None, source="<text>"):
    cfg = ScenarioConfig(source=source) if cfg is None else cfg
    for lineno, line in enumerate(lines, 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        try:
            cfg.assign(key, value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return cfg


def builtin_names():
    root = resources.files("optomag").joinpath(BUILTIN_DIR)
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(path=None, sets=()):
    """Read a config file (or a built-in config by name) and apply ``--set`` pairs."""
    if path is None:
        path = "strong_coupling"
    p = Path(path)
    if p.is_file():
        text, source = p.read_text(encoding="utf-8"), str(p)
    else:
        res = resources.files("optomag").joinpath(BUILTIN_DIR, f"{path}.cfg")
        if not res.is_file():
            raise ConfigError(f"config {path!r} is neither a file nor a built-in ({', '.join(builtin_names())})")
        text, source = res.read_text(encoding="utf-8"), f"builtin:{path}"
    cfg = parse_lines(text.splitlines(), source=source)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg.assign(key, value)
    return cfg

"""Experiment configuration: schema checks, unit conversion and defaults."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, fields

import numpy as np

from ..errors import ConfigError
from ..models import CQED_COLUMNS, TWO_PI, CqedParams, OscillatorParams, cqed_preset

EXPERIMENTS = (
    "steady",
    "phase-lock-sweep",
    "zero-crossing",
    "existence-map",
    "detuning-map",
    "sync-sweep",
    "rmax-map",
    "qutrit-sweep",
    "cqed-run",
    "cqed-calibrate",
)
CQED_EXPERIMENTS = ("cqed-run", "cqed-calibrate")
UNITS = ("Gamma", "rad_s", "Hz_2pi")
TOP_KEYS = {"experiment", "units", "params", "sweep", "cases", "options", "tolerances", "output", "plot", "description"}
AXIS_KEYS = {"name", "start", "stop", "points", "scale"}

OSC_FIELDS = {f.name for f in fields(OscillatorParams)}
CQED_FIELDS = {f.name for f in fields(CqedParams)}
CQED_NON_FREQ = {"n_transmon", "n_resonator", "compensate"}
# extra keys understood in "params" on top of the dataclass fields
OSC_EXTRA = {"unit_relaxation"}
CQED_EXTRA = {"column"}

OPTION_DEFAULTS = {
    "steady": {},
    "phase-lock-sweep": {},
    "zero-crossing": {"g_range": [0.0, 10.0], "n_scan": 400},
    "existence-map": {"g_range": [0.0, 10.0], "n_scan": 400, "threshold": 4.0},
    "detuning-map": {"g_range": [0.0, 10.0], "dq_range": [-5.0, 5.0]},
    "sync-sweep": {"partial": False},
    "rmax-map": {"g_range": [0.0, 5.0], "n_scan": 200},
    "qutrit-sweep": {},
    "cqed-run": {"observables": ["coherence"], "order": 2, "time_unit": 1e-6},
    "cqed-calibrate": {"time_unit": 1e-6},
}
TOLERANCE_DEFAULTS = {"harmonic_balance": 1e-12}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.start)])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> dict:
        return {"name": self.name, "start": self.start, "stop": self.stop, "points": self.points, "scale": self.scale}


@dataclass(frozen=True)
class Case:
    label: str
    params: dict  # as written in the config (config units)
    axes: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    units: str
    cases: tuple
    options: dict
    tolerances: dict
    output: str
    plot: dict | None
    description: str = ""

    @property
    def is_cqed(self) -> bool:
        return self.experiment in CQED_EXPERIMENTS

    def to_dict(self) -> dict:
        """Resolved config; feeding it back to :func:`parse_config` gives an equal object."""
        out = {
            "experiment": self.experiment,
            "units": self.units,
            "cases": [
                {"label": c.label, "params": copy.deepcopy(c.params), "sweep": [a.to_dict() for a in c.axes]}
                for c in self.cases
            ],
            "options": copy.deepcopy(self.options),
            "tolerances": dict(self.tolerances),
            "output": self.output,
        }
        if self.plot is not None:
            out["plot"] = copy.deepcopy(self.plot)
        if self.description:
            out["description"] = self.description
        return out


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(path, f"expected a finite number, got {v!r}")
    return v


def _check_params(params, experiment: str, path: str) -> dict:
    if not isinstance(params, dict):
        _fail(path, "expected an object")
    cqed = experiment in CQED_EXPERIMENTS
    allowed = (CQED_FIELDS | CQED_EXTRA) if cqed else (OSC_FIELDS | OSC_EXTRA)
    for k, v in params.items():
        if k not in allowed:
            _fail(f"{path}.{k}", f"unknown parameter for {experiment}")
        if k == "column":
            if v not in CQED_COLUMNS:
                _fail(f"{path}.{k}", f"unknown column {v!r}; choose from {sorted(CQED_COLUMNS)}")
        elif k in ("unit_relaxation", "compensate"):
            if not isinstance(v, bool):
                _fail(f"{path}.{k}", "expected true or false")
        elif k in ("n_transmon", "n_resonator"):
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                _fail(f"{path}.{k}", "expected an integer >= 2")
        elif k == "omega_d" and v is None:
            pass
        else:
            _number(v, f"{path}.{k}")
    return dict(params)


def _check_axes(sweep, experiment: str, path: str) -> tuple:
    if not isinstance(sweep, list):
        _fail(path, "expected a list of axes")
    cqed = experiment in CQED_EXPERIMENTS
    names = (CQED_FIELDS - CQED_NON_FREQ) if cqed else (OSC_FIELDS - {"s"})
    axes = []
    for i, ax in enumerate(sweep):
        p = f"{path}[{i}]"
        if not isinstance(ax, dict):
            _fail(p, "expected an object")
        extra = set(ax) - AXIS_KEYS
        if extra:
            _fail(p, f"unknown keys {sorted(extra)}")
        for k in ("name", "start", "stop", "points"):
            if k not in ax:
                _fail(p, f"missing {k!r}")
        if ax["name"] not in names:
            _fail(f"{p}.name", f"{ax['name']!r} is not a sweepable parameter")
        start, stop = _number(ax["start"], f"{p}.start"), _number(ax["stop"], f"{p}.stop")
        pts = ax["points"]
        if isinstance(pts, bool) or not isinstance(pts, int) or pts < 1:
            _fail(f"{p}.points", "expected an integer >= 1")
        scale = ax.get("scale", "linear")
        if scale not in ("linear", "log"):
            _fail(f"{p}.scale", "expected 'linear' or 'log'")
        if scale == "log" and (start <= 0 or stop <= 0):
            _fail(p, "log axes need positive bounds")
        axes.append(Axis(ax["name"], start, stop, pts, scale))
    if len({a.name for a in axes}) != len(axes):
        _fail(path, "axis names must be distinct")
    return tuple(axes)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a decoded JSON config and fill defaults. Raises ConfigError."""
    if not isinstance(raw, dict):
        _fail("$", "config must be a JSON object")
    extra = set(raw) - TOP_KEYS
    if extra:
        _fail("$", f"unknown keys {sorted(extra)}")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        _fail("$.experiment", f"expected one of {list(EXPERIMENTS)}, got {exp!r}")
    units = raw.get("units")
    if units not in UNITS:
        _fail("$.units", f"mandatory; expected one of {list(UNITS)}, got {units!r}")
    if exp in CQED_EXPERIMENTS and units == "Gamma":
        _fail("$.units", "circuit-QED experiments take 'rad_s' or 'Hz_2pi'")
    if exp not in CQED_EXPERIMENTS and units != "Gamma":
        _fail("$.units", "oscillator experiments are dimensionless; use 'Gamma'")
    base = _check_params(raw.get("params", {}), exp, "$.params")
    base_axes = _check_axes(raw.get("sweep", []), exp, "$.sweep")
    cases = []
    if "cases" in raw:
        if not isinstance(raw["cases"], list) or not raw["cases"]:
            _fail("$.cases", "expected a non-empty list")
        for i, c in enumerate(raw["cases"]):
            p = f"$.cases[{i}]"
            if not isinstance(c, dict) or set(c) - {"label", "params", "sweep"}:
                _fail(p, "expected an object with label, params, sweep")
            label = c.get("label", str(i))
            if not isinstance(label, str):
                _fail(f"{p}.label", "expected a string")
            params = {**base, **_check_params(c.get("params", {}), exp, f"{p}.params")}
            axes = _check_axes(c["sweep"], exp, f"{p}.sweep") if "sweep" in c else base_axes
            cases.append(Case(label, params, axes))
        labels = [c.label for c in cases]
        if len(set(labels)) != len(labels):
            _fail("$.cases", "labels must be distinct")
        shapes = {tuple(a.name for a in c.axes) for c in cases}
        if len(shapes) > 1:
            _fail("$.cases", "all cases must sweep the same parameters in the same order")
    else:
        cases.append(Case("", base, base_axes))
    opts = dict(OPTION_DEFAULTS[exp])
    user_opts = raw.get("options", {})
    if not isinstance(user_opts, dict):
        _fail("$.options", "expected an object")
    for k, v in user_opts.items():
        if k not in opts:
            _fail(f"$.options.{k}", f"unknown option for {exp}")
        opts[k] = v
    _check_options(exp, opts)
    tol = dict(TOLERANCE_DEFAULTS)
    for k, v in raw.get("tolerances", {}).items():
        if k not in tol:
            _fail(f"$.tolerances.{k}", "unknown tolerance")
        tol[k] = _number(v, f"$.tolerances.{k}")
    output = raw.get("output", exp)
    if not isinstance(output, str) or not output or "/" in output or output.startswith("."):
        _fail("$.output", "expected a plain file stem")
    plot = raw.get("plot")
    if plot is not None:
        _check_plot(plot)
    desc = raw.get("description", "")
    if not isinstance(desc, str):
        _fail("$.description", "expected a string")
    for c in cases:
        # build once so parameter-level constraints surface as config errors
        try:
            resolve_params(exp, units, c.params)
        except (ValueError, TypeError) as exc:
            _fail(f"$.cases[{c.label or 0}].params" if "cases" in raw else "$.params", str(exc))
    return ExperimentConfig(exp, units, tuple(cases), opts, tol, output, plot, desc)


def _check_range(v, path):
    if not (isinstance(v, list) and len(v) == 2):
        _fail(path, "expected [low, high]")
    lo, hi = _number(v[0], f"{path}[0]"), _number(v[1], f"{path}[1]")
    if hi <= lo:
        _fail(path, "high must exceed low")


def _check_options(exp: str, opts: dict):
    for k in ("g_range", "dq_range"):
        if k in opts:
            _check_range(opts[k], f"$.options.{k}")
    if "n_scan" in opts and (isinstance(opts["n_scan"], bool) or not isinstance(opts["n_scan"], int) or opts["n_scan"] < 3):
        _fail("$.options.n_scan", "expected an integer >= 3")
    if "threshold" in opts:
        _number(opts["threshold"], "$.options.threshold")
    if "partial" in opts and not isinstance(opts["partial"], bool):
        _fail("$.options.partial", "expected true or false")
    if "observables" in opts:
        obs = opts["observables"]
        if not isinstance(obs, list) or not obs or set(obs) - {"coherence", "sync"}:
            _fail("$.options.observables", "expected a non-empty subset of ['coherence', 'sync']")
    if "order" in opts and (isinstance(opts["order"], bool) or not isinstance(opts["order"], int) or opts["order"] < 1):
        _fail("$.options.order", "expected an integer >= 1")
    if "time_unit" in opts and _number(opts["time_unit"], "$.options.time_unit") <= 0:
        _fail("$.options.time_unit", "must be positive")


def _check_plot(plot):
    if not isinstance(plot, dict) or plot.get("kind") not in ("line", "heatmap"):
        _fail("$.plot.kind", "expected 'line' or 'heatmap'")
    if plot["kind"] == "line" and not (isinstance(plot.get("y"), list) and plot["y"]):
        _fail("$.plot.y", "line plots need a list of y columns")
    if plot["kind"] == "heatmap" and not isinstance(plot.get("value"), str):
        _fail("$.plot.value", "heatmaps need a value column")


def resolve_params(experiment: str, units: str, params: dict):
    """Model parameters in internal units: Gamma for the oscillator, rad/s for cQED."""
    if experiment in CQED_EXPERIMENTS:
        kw = {k: v for k, v in params.items() if k != "column"}
        if units == "Hz_2pi":
            kw = {k: (v * TWO_PI if k not in CQED_NON_FREQ and v is not None else v) for k, v in kw.items()}
        if "column" in params:
            return cqed_preset(params["column"], **kw)
        return CqedParams(**kw)
    kw = {k: v for k, v in params.items() if k != "unit_relaxation"}
    if params.get("unit_relaxation", False):
        if "gamma_a" in kw or "gamma_b" in kw:
            raise ValueError("unit_relaxation fixes gamma_a and gamma_b; do not set them")
        wa, wb = kw.pop("w_a", 0.5), kw.pop("w_b", 0.5)
        return OscillatorParams.with_unit_relaxation(wa, wb, **kw)
    return OscillatorParams(**kw)


def point_params(cfg: ExperimentConfig, case: Case, values: dict):
    return resolve_params(cfg.experiment, cfg.units, {**case.params, **values})


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file; syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    return parse_config(raw)

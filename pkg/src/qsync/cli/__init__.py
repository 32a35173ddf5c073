"""Command-line front end: ``qsync run``, ``qsync presets`` and ``qsync validate``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import ConfigError
from .config import ExperimentConfig, load_config, parse_config, point_params
from .experiments import columns, evaluate
from .presets import get_preset, list_presets
from .svg import PlotError, heatmap_svg, line_svg

__all__ = [
    "ResultTable",
    "run_config",
    "write_table",
    "emit_plot",
    "list_presets",
    "get_preset",
    "parse_config",
    "load_config",
    "main",
]

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
FAILED = "FAILED"


@dataclass
class ResultTable:
    """Rectangular table of real cells; complex outputs are split into _re/_im columns."""

    columns: list  # names
    units: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str, case: str | None = None) -> np.ndarray:
        k = self.columns.index(name)
        rows = [r for r in self.rows if r[0] != FAILED]
        if case is not None and "case" in self.columns:
            rows = [r for r in rows if r[0] == case]
        return np.array([r[k] for r in rows], dtype=float if name != "case" else object)

    @property
    def failed(self) -> bool:
        return bool(self.rows) and self.rows[-1][0] == FAILED


def _flat_columns(cfg: ExperimentConfig):
    names, units = [], []
    if len(cfg.cases) > 1:
        names.append("case")
        units.append("")
    for ax in cfg.cases[0].axes:
        names.append(ax.name)
        units.append("Hz" if cfg.units == "Hz_2pi" else ("rad/s" if cfg.units == "rad_s" else "Gamma"))
    outs = columns(cfg.experiment, cfg.options)
    for name, unit, kind in outs:
        if kind == "complex":
            names += [f"{name}_re", f"{name}_im"]
            units += [unit, unit]
        else:
            names.append(name)
            units.append(unit)
    return names, units, outs


def _tasks(cfg: ExperimentConfig):
    """(case label, axis values, resolved params) in row order; the first axis varies slowest."""
    out = []
    for case in cfg.cases:
        grids = [ax.values() for ax in case.axes]
        for combo in itertools.product(*grids):
            values = {ax.name: float(v) for ax, v in zip(case.axes, combo)}
            out.append((case.label, values, point_params(cfg, case, values)))
    return out


def _worker(args):
    experiment, params, options = args
    return evaluate(experiment, params, options)


def _row(cfg, outs, label, values, result):
    row = [label] if len(cfg.cases) > 1 else []
    row += [values[ax.name] for ax in cfg.cases[0].axes]
    for name, _, kind in outs:
        v = result[name]
        if kind == "complex":
            row += [float(np.real(v)), float(np.imag(v))]
        else:
            row.append(float(v))
    return row


def resolve_workers(flag: int | None = None) -> int:
    """Explicit flag, else QSYNC_WORKERS, else the number of available cores."""
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("QSYNC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QSYNC_WORKERS must be an integer, got {env!r}") from None
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def _metadata(cfg: ExperimentConfig, names, units) -> dict:
    return {
        "qsync_version": __version__,
        "config": cfg.to_dict(),
        "columns": [{"name": n, "unit": u} for n, u in zip(names, units)],
        "conventions": {
            "vectorization": "column-stacking",
            "log_base": "e",
            "frame": (
                "each transmon in its pump frame; qubit observables averaged over the cycle in the drive frame"
                if cfg.is_cqed
                else "frame rotating at the drive frequency"
            ),
        },
    }


def run_config(cfg: ExperimentConfig, workers: int = 1) -> ResultTable:
    """Evaluate every sweep point; on a solver failure the table ends with a FAILED row."""
    names, units, outs = _flat_columns(cfg)
    table = ResultTable(names, units, metadata=_metadata(cfg, names, units))
    tasks = _tasks(cfg)
    options = {**cfg.options, "hb_tol": cfg.tolerances["harmonic_balance"]}
    jobs = [(cfg.experiment, p, options) for _, _, p in tasks]
    results = iter(())
    pool = None
    if workers > 1 and len(jobs) > 1:
        pool = ProcessPoolExecutor(min(workers, len(jobs)))
        results = pool.map(_worker, jobs)
    else:
        results = map(_worker, jobs)
    try:
        for (label, values, _), res in zip(tasks, results):
            table.rows.append(_row(cfg, outs, label, values, res))
        table.metadata["status"] = "ok"
    except Exception as exc:  # any solver failure ends the run with a marker row
        table.rows.append([FAILED] + [""] * (len(names) - 1))
        table.metadata["status"] = "failed"
        table.metadata["error"] = f"{type(exc).__name__}: {exc}"
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    table.metadata["rows"] = sum(1 for r in table.rows if r[0] != FAILED)
    return table


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if math.isnan(v):
        return "nan"
    return repr(float(v))


def table_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_table(table: ResultTable, out_dir, stem: str) -> tuple:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    meta_path = out_dir / f"{stem}.json"
    csv_path.write_text(table_csv(table), encoding="utf-8")
    meta_path.write_text(json.dumps(table.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, meta_path


def emit_plot(table: ResultTable, kind: str, path, x: str | None = None, y=None, value: str | None = None) -> Path:
    """Write a static SVG line plot or heatmap of table columns."""
    cols = [c for c in table.columns if c != "case"]
    cases = [None]
    if "case" in table.columns:
        # keep the order of first appearance rather than alphabetical
        seen = []
        for r in table.rows:
            if r[0] != FAILED and r[0] not in seen:
                seen.append(r[0])
        cases = seen
    x = x or cols[0]
    if isinstance(y, str):
        y = [y]
    for c in [x] + list(y or []) + ([value] if value else []):
        if c not in table.columns:
            raise PlotError(f"column {c!r} not in table")
    title = table.metadata.get("config", {}).get("output", "")
    unit = dict(zip(table.columns, table.units))
    if kind == "line":
        if not y:
            raise PlotError("line plots need y columns")
        xs = table.column(x, cases[0])
        series = {}
        for case in cases:
            if len(table.column(x, case)) != len(xs):
                raise PlotError("cases differ in length")
            for c in y:
                series[c if case is None else f"{c} [{case}]"] = table.column(c, case)
        svg = line_svg(xs, series, f"{x} ({unit[x]})", ", ".join(y), title)
    elif kind == "heatmap":
        ycol = y[0] if y else None
        if ycol is None or value is None:
            raise PlotError("heatmaps need x, y and value columns")
        xv, yv, zv = table.column(x, cases[0]), table.column(ycol, cases[0]), table.column(value, cases[0])
        gx, gy = np.unique(xv), np.unique(yv)
        if len(gx) * len(gy) != len(xv):
            raise PlotError("x and y columns do not form a full grid")
        z = np.full((len(gx), len(gy)), np.nan)
        z[np.searchsorted(gx, xv), np.searchsorted(gy, yv)] = zv
        svg = heatmap_svg(gx, gy, z, f"{x} ({unit[x]})", f"{ycol} ({unit[ycol]})", f"{title}: {value}")
    else:
        raise PlotError(f"unknown plot kind {kind!r}")
    path = Path(path)
    path.write_text(svg, encoding="utf-8")
    return path


def _plot_from_config(table: ResultTable, cfg: ExperimentConfig, path):
    spec = cfg.plot or {}
    names = [c for c in table.columns if c != "case"]
    axes = [a.name for a in cfg.cases[0].axes]
    if not spec:
        if len(axes) == 2:
            spec = {"kind": "heatmap", "x": axes[0], "y": axes[1], "value": names[2]}
        else:
            x = axes[0] if axes else names[0]
            spec = {"kind": "line", "x": x, "y": [c for c in names if c != x]}
    return emit_plot(table, spec["kind"], path, spec.get("x"), spec.get("y"), spec.get("value"))


def _load_raw(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None


def _cmd_run(args) -> int:
    if not args.config and not args.preset:
        raise ConfigError("give a config file or --preset NAME")
    raw = {}
    if args.preset:
        try:
            raw = get_preset(args.preset)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    if args.config:
        user = _load_raw(args.config)
        if not isinstance(user, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        raw.update(user)
    cfg = parse_config(raw)
    table = run_config(cfg, resolve_workers(args.workers))
    csv_path, meta_path = write_table(table, args.out, cfg.output)
    print(f"wrote {csv_path} ({table.metadata['rows']} rows) and {meta_path}")
    if args.plot and table.metadata["rows"]:
        print(f"wrote {_plot_from_config(table, cfg, Path(args.out) / f'{cfg.output}.svg')}")
    if table.metadata["status"] != "ok":
        print(f"solver failure: {table.metadata['error']}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name, desc in list_presets():
        print(f"{name:28s} {desc}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    n = sum(int(np.prod([a.points for a in c.axes])) for c in cfg.cases)
    print(f"{args.config}: ok ({cfg.experiment}, {n} points)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsync", description="Composite two-qudit oscillator simulations.")
    ap.add_argument("--version", action="version", version=f"qsync {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config or preset")
    run.add_argument("config", nargs="?", help="JSON config; keys override the preset when both are given")
    run.add_argument("--preset", help="start from a named preset (see 'qsync presets')")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--workers", type=int, default=None, help="worker processes (default: QSYNC_WORKERS or all cores)")
    run.add_argument("--plot", action="store_true", help="also write an SVG figure")
    run.set_defaults(func=_cmd_run)
    pr = sub.add_parser("presets", help="list the built-in presets")
    pr.set_defaults(func=_cmd_presets)
    va = sub.add_parser("validate", help="check a config without running it")
    va.add_argument("config")
    va.set_defaults(func=_cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""
Parameter sweeps, figure recipes and their CSV / SVG output.

A :class:`SweepSpec` names the scenarios, the fixed parameters, one swept
axis and an optional list of series (each a small set of parameter
overrides). Powers and noise levels are given in dB, everything else is
linear. :func:`run_sweep` solves every (scenario, series, axis point)
combination and returns :class:`ResultRow` objects in that order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import ConfigError
from .link_model import (
    FA,
    FP,
    IA,
    IP,
    NoiseProfile,
    ScenarioId,
    SecurityConstraints,
    TransmitConfig,
    db_to_linear,
)
from .monte_carlo import validate_scenario, worker_count
from .solver import CsrSolution, Regime, solve

__all__ = [
    "PARAMETERS",
    "NOISE_DEFAULTS",
    "Axis",
    "Validation",
    "SweepSpec",
    "ResultRow",
    "PlotSpec",
    "run_sweep",
    "figure_recipe",
    "FIGURE_IDS",
    "format_csv",
    "emit_csv",
    "provenance",
    "emit_svg",
    "parse_config",
    "check_rows",
]

PARAMETERS = ("upsilon", "sigma_b_db", "sigma_w_db", "sigma_e_db", "pa_db", "eps_c", "eps_s", "eps_t")
_REQUIRED = ("upsilon", "sigma_b_db", "sigma_w_db", "sigma_e_db", "eps_c", "eps_s", "eps_t")

NOISE_DEFAULTS = {"upsilon": 0.01, "sigma_b_db": -20.0, "sigma_w_db": 0.0, "sigma_e_db": 0.0}

LABELS = {
    "upsilon": "upsilon",
    "sigma_b_db": "sigma_b^2 (dB)",
    "sigma_w_db": "sigma_w^2 (dB)",
    "sigma_e_db": "sigma_e^2 (dB)",
    "pa_db": "P_a (dB)",
    "eps_c": "COP constraint eps_c",
    "eps_s": "SOP constraint eps_s",
    "eps_t": "TP constraint eps_t",
}

CHECK_TOL = 1e-9


# ---------------------------------------------------------------------------
# Sweep description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    steps: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in PARAMETERS:
            raise ConfigError(f"axis: unknown parameter {self.name!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError(f"axis.{self.name}: steps must be an integer >= 2, got {self.steps!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            raise ConfigError(f"axis.{self.name}: need finite start < stop, got {self.start!r}:{self.stop!r}")
        if self.spacing not in ("linear", "logarithmic"):
            raise ConfigError(f"axis.{self.name}: spacing must be linear or logarithmic, got {self.spacing!r}")
        if self.spacing == "logarithmic" and self.start <= 0.0:
            raise ConfigError(f"axis.{self.name}: logarithmic spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "logarithmic":
            return np.geomspace(self.start, self.stop, int(self.steps))
        return np.linspace(self.start, self.stop, int(self.steps))

    @classmethod
    def parse(cls, name: str, text: str) -> "Axis":
        """Parse ``start:stop:steps[:spacing]``."""
        parts = [p.strip() for p in text.split(":")]
        if len(parts) not in (3, 4):
            raise ConfigError(f"axis.{name}: expected start:stop:steps[:spacing], got {text!r}")
        try:
            start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"axis.{name}: cannot parse {text!r}") from None
        spacing = parts[3] if len(parts) == 4 else "linear"
        spacing = {"lin": "linear", "log": "logarithmic"}.get(spacing, spacing)
        return cls(name, start, stop, steps, spacing)


@dataclass(frozen=True)
class Validation:
    """Monte Carlo check of each feasible optimum."""

    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1000:
            raise ConfigError(f"validation.samples must be >= 1000, got {self.samples}")


@dataclass(frozen=True)
class SweepSpec:
    """One figure's worth of solves.

    ``series`` is a tuple of override maps; each entry adds one curve per
    scenario. ``assumed`` lists the settings that are documented defaults
    rather than stated values.
    """

    scenarios: tuple[ScenarioId, ...]
    fixed: Mapping[str, float]
    axis: Axis
    series: tuple[Mapping[str, float], ...] = ({},)
    validation: Validation | None = None
    name: str = "sweep"
    title: str = ""
    assumed: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "fixed", dict(self.fixed))
        object.__setattr__(self, "series", tuple(dict(s) for s in self.series) or ({},))
        self.validate()

    @property
    def is_assumed(self) -> bool:
        return bool(self.assumed)

    def validate(self) -> None:
        if not self.scenarios:
            raise ConfigError("scenarios: at least one scenario is required")
        for key in self.fixed:
            if key not in PARAMETERS:
                raise ConfigError(f"fixed: unknown parameter {key!r}")
        if self.axis.name in self.fixed:
            raise ConfigError(f"axis.{self.axis.name}: also given as a fixed parameter")
        keys = set(self.series[0])
        for k, entry in enumerate(self.series):
            if set(entry) != keys:
                raise ConfigError(f"series[{k}]: every series must set the same parameters")
            for key in entry:
                if key not in PARAMETERS:
                    raise ConfigError(f"series[{k}]: unknown parameter {key!r}")
                if key in self.fixed or key == self.axis.name:
                    raise ConfigError(f"series.{key}: also given as a fixed or axis parameter")
        given = set(self.fixed) | keys | {self.axis.name}
        required = list(_REQUIRED)
        if any(s.uses_artificial_noise for s in self.scenarios):
            required.append("pa_db")
        for key in required:
            if key not in given:
                raise ConfigError(f"missing parameter {key!r}")

    def series_label(self, k: int, scenario: ScenarioId | None = None) -> str:
        return " ".join(f"{key}={_fmt(v)}" for key, v in self._effective(k, scenario).items())

    def _effective(self, k: int, scenario: ScenarioId | None) -> dict:
        entry = self.series[k]
        if scenario is None or scenario.uses_artificial_noise:
            return dict(entry)
        return {key: v for key, v in entry.items() if key != "pa_db"}

    def points(self) -> list[tuple[ScenarioId, int, int, dict]]:
        """All (scenario, series index, axis index, parameters) in output order.

        A series that only changes ``pa_db`` does not affect the power-control
        scenarios, so repeated curves are dropped for them.
        """
        out = []
        for scenario in self.scenarios:
            seen = set()
            for k, entry in enumerate(self.series):
                sig = tuple(sorted(self._effective(k, scenario).items()))
                if sig in seen:
                    continue
                seen.add(sig)
                for i, x in enumerate(self.axis.values()):
                    params = {**self.fixed, **entry, self.axis.name: float(x)}
                    out.append((scenario, k, i, params))
        return out


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    scenario: str
    series: str
    index: int
    upsilon: float
    sigma_b2: float
    sigma_b_db: float
    sigma_w2: float
    sigma_w_db: float
    sigma_e2: float
    sigma_e_db: float
    pa: float
    pa_db: float
    eps_c: float
    eps_s: float
    eps_t: float
    csr: float
    rs_opt: float
    power_opt: float
    regime: str
    tp_at_opt: float
    cop_at_opt: float
    sop_at_opt: float
    mc_tp: float | None = None
    mc_tp_half_width: float | None = None
    mc_sop: float | None = None
    mc_sop_half_width: float | None = None
    mc_cop: float | None = None
    mc_cop_half_width: float | None = None
    mc_pass: bool | None = None

    def __post_init__(self):
        if self.regime not in {r.value for r in Regime}:
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def value(self, name: str) -> float:
        return getattr(self, name)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"
        return f"{x:.12g}"
    return str(x)


def _solve_point(spec: SweepSpec, scenario: ScenarioId, k: int, i: int, params: dict) -> ResultRow:
    noise = NoiseProfile.from_db(params["sigma_b_db"], params["sigma_w_db"], params["sigma_e_db"], params["upsilon"])
    cons = SecurityConstraints(params["eps_c"], params["eps_s"], params["eps_t"])
    an = scenario.uses_artificial_noise
    pa = db_to_linear(params["pa_db"]) if an else None
    sol: CsrSolution = solve(scenario, noise, cons, pa)
    row = ResultRow(
        scenario=scenario.code,
        series=spec.series_label(k, scenario),
        index=i,
        upsilon=noise.upsilon,
        sigma_b2=noise.sigma_b2,
        sigma_b_db=params["sigma_b_db"],
        sigma_w2=noise.sigma_w2,
        sigma_w_db=params["sigma_w_db"],
        sigma_e2=noise.sigma_e2,
        sigma_e_db=params["sigma_e_db"],
        pa=pa if an else math.nan,
        pa_db=params["pa_db"] if an else math.nan,
        eps_c=cons.eps_c,
        eps_s=cons.eps_s,
        eps_t=cons.eps_t,
        csr=sol.csr,
        rs_opt=sol.rs_opt,
        power_opt=sol.power_opt,
        regime=sol.regime.value,
        tp_at_opt=sol.tp_at_opt,
        cop_at_opt=sol.cop_at_opt,
        sop_at_opt=sol.sop_at_opt,
    )
    if spec.validation is None or not sol.feasible:
        return row
    cfg = TransmitConfig(pa, sol.power_opt, sol.rs_opt) if an else TransmitConfig(sol.power_opt, 1.0, sol.rs_opt)
    report = validate_scenario(scenario, noise, cfg, spec.validation.samples, spec.validation.seed)
    mc = {c.name: c.estimate for c in report.comparisons}
    return replace(
        row,
        mc_tp=mc["tp"].mean,
        mc_tp_half_width=mc["tp"].half_width,
        mc_sop=mc["sop"].mean,
        mc_sop_half_width=mc["sop"].half_width,
        mc_cop=mc["cop"].mean,
        mc_cop_half_width=mc["cop"].half_width,
        mc_pass=report.passed,
    )


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[ResultRow]:
    """Solve every point of ``spec``; rows come back in declaration order."""
    spec.validate()
    points = spec.points()
    workers = worker_count() if workers is None else max(1, workers)
    job = lambda p: _solve_point(spec, *p)
    if workers == 1:
        return [job(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, points))


def check_rows(rows: Iterable[ResultRow]) -> None:
    """Raise if a feasible row violates one of its declared bounds."""
    for row in rows:
        if row.regime == Regime.INFEASIBLE.value:
            if row.csr != 0.0:
                raise AssertionError(f"{row.scenario}[{row.index}]: infeasible row with csr={row.csr}")
            continue
        if row.cop_at_opt > row.eps_c + CHECK_TOL:
            raise AssertionError(f"{row.scenario}[{row.index}]: COP {row.cop_at_opt} > eps_c {row.eps_c}")
        if row.sop_at_opt > row.eps_s + CHECK_TOL:
            raise AssertionError(f"{row.scenario}[{row.index}]: SOP {row.sop_at_opt} > eps_s {row.eps_s}")
        if row.tp_at_opt < 1.0 - row.eps_t - CHECK_TOL:
            raise AssertionError(f"{row.scenario}[{row.index}]: TP {row.tp_at_opt} < 1 - eps_t {1 - row.eps_t}")


# ---------------------------------------------------------------------------
# Figure recipes
# ---------------------------------------------------------------------------

_EPS_AXIS = {name: Axis(name, 0.01, 0.5, 50) for name in ("eps_c", "eps_s", "eps_t")}
_FINE_EPS_S = Axis("eps_s", 0.0001, 0.01, 100)

_PAIRS_EC = (
    {"eps_s": 0.03, "eps_t": 0.5},
    {"eps_s": 0.02, "eps_t": 0.1},
    {"eps_s": 0.1, "eps_t": 0.3},
)
_PAIRS_ES = (
    {"eps_c": 0.01, "eps_t": 0.01},
    {"eps_c": 0.1, "eps_t": 0.1},
    {"eps_c": 0.3, "eps_t": 0.3},
)
_PAIRS_ET = (
    {"eps_c": 0.3, "eps_s": 0.01},
    {"eps_c": 0.1, "eps_s": 0.1},
    {"eps_c": 0.01, "eps_s": 0.3},
)


def _with_defaults(defaults, explicit, axis: Axis, series) -> dict:
    """``explicit`` over ``defaults``, minus defaults that the axis or a series overrides."""
    swept = {axis.name, *(k for entry in series for k in entry)}
    out = {k: v for k, v in defaults.items() if k not in swept}
    out.update(explicit)
    return out


def _recipes() -> dict[str, SweepSpec]:
    r: dict[str, SweepSpec] = {}

    def add(rid, title, scenarios, fixed, axis, series=({},), assumed=()):
        r[rid] = SweepSpec(
            scenarios=scenarios,
            fixed=_with_defaults(NOISE_DEFAULTS, fixed, axis, series),
            axis=axis,
            series=series,
            name=rid,
            title=title,
            assumed=tuple(assumed),
        )

    axis_note = "axis range {0} in [0.01, 0.5], 50 points"
    for s in (IP, FP):
        add(f"fig2_{s.code.lower()}", f"CSR vs eps_c, {s.code}", (s,), {}, _EPS_AXIS["eps_c"], _PAIRS_EC,
            (axis_note.format("eps_c"), "series 3 (eps_s=0.1, eps_t=0.3)"))
    for s in (IA, FA):
        add(f"fig3_{s.code.lower()}", f"CSR vs eps_c, {s.code}", (s,), {"pa_db": -20.0}, _EPS_AXIS["eps_c"], _PAIRS_EC,
            (axis_note.format("eps_c"), "all (eps_s, eps_t) series"))
    for s in (IP, FP):
        add(f"fig4_{s.code.lower()}", f"CSR vs eps_s, {s.code}", (s,), {"sigma_b_db": -30.0}, _FINE_EPS_S, _PAIRS_ES,
            ("axis range eps_s in [0.0001, 0.01], 100 points", "series 2-3 (eps_c, eps_t)"))
    for s in (IA, FA):
        add(f"fig5_{s.code.lower()}", f"CSR vs eps_s, {s.code}", (s,), {"sigma_b_db": -31.0, "pa_db": -20.0},
            _FINE_EPS_S, _PAIRS_ES, ("axis range eps_s in [0.0001, 0.01], 100 points", "series 2-3 (eps_c, eps_t)"))
    for s in (IP, FP):
        add(f"fig6_{s.code.lower()}", f"CSR vs eps_t, {s.code}", (s,), {}, _EPS_AXIS["eps_t"], _PAIRS_ET,
            (axis_note.format("eps_t"), "all (eps_c, eps_s) series"))
    for s in (IA, FA):
        add(f"fig7_{s.code.lower()}", f"CSR vs eps_t, {s.code}", (s,), {"pa_db": -20.0}, _EPS_AXIS["eps_t"], _PAIRS_ET,
            (axis_note.format("eps_t"), "all (eps_c, eps_s) series"))

    add("fig8_pc", "CSR vs eps_c, IP and FP", (IP, FP), {"eps_s": 0.1, "eps_t": 0.1}, _EPS_AXIS["eps_c"],
        ({"upsilon": 0.01}, {"upsilon": 0.001}), (axis_note.format("eps_c"),))
    add("fig8_an", "CSR vs eps_c, IA and FA", (IA, FA), {"eps_s": 0.1, "eps_t": 0.1}, _EPS_AXIS["eps_c"],
        ({"pa_db": -5.0}, {"pa_db": -20.0}), (axis_note.format("eps_c"),))

    pa_series = ({"pa_db": -20.0}, {"pa_db": -15.0})
    for fig, name, others in (
        ("fig9", "eps_c", {"eps_s": 0.1, "eps_t": 0.1}),
        ("fig10", "eps_s", {"eps_c": 0.1, "eps_t": 0.1}),
        ("fig11", "eps_t", {"eps_c": 0.1, "eps_s": 0.1}),
    ):
        for tag, pair in (("ind", (IP, IA)), ("fri", (FP, FA))):
            add(f"{fig}_{tag}", f"CSR vs {name}, PC vs AN", pair, others, _EPS_AXIS[name], pa_series,
                (axis_note.format(name),))
    return r


_RECIPES = _recipes()
FIGURE_IDS = tuple(_RECIPES)


def figure_recipe(figure_id: str) -> SweepSpec:
    """Sweep reproducing one numerical-results figure (one subfigure per id)."""
    try:
        return _RECIPES[figure_id]
    except KeyError:
        raise ConfigError(f"unknown figure id {figure_id!r}; known: {', '.join(FIGURE_IDS)}") from None


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def parse_config(text: str, defaults: Mapping[str, float] | None = None) -> SweepSpec:
    """Build a :class:`SweepSpec` from ``key = value`` lines.

    Recognised keys: ``scenarios`` (comma list), any parameter name,
    ``axis.<param> = start:stop:steps[:spacing]``, ``series.<param> = a, b, ...``
    (all series lists are zipped), ``validation.samples``, ``validation.seed``,
    ``name`` and ``title``.
    """
    fixed: dict[str, float] = {}
    scenarios = None
    axis = None
    series: dict[str, list[float]] = {}
    validation: dict[str, int] = {}
    meta = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        try:
            if key == "scenarios":
                scenarios = tuple(ScenarioId.parse(s) for s in value.split(",") if s.strip())
            elif key.startswith("axis."):
                if axis is not None:
                    raise ConfigError(f"line {lineno}: only one axis is allowed")
                axis = Axis.parse(key[5:], value)
            elif key.startswith("series."):
                series[key[7:]] = [float(v) for v in value.split(",") if v.strip()]
            elif key in ("validation.samples", "validation.seed"):
                validation[key.split(".")[1]] = int(value)
            elif key in ("name", "title"):
                meta[key] = value
            elif key in PARAMETERS:
                fixed[key] = float(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if scenarios is None:
        raise ConfigError("missing key 'scenarios'")
    if axis is None:
        raise ConfigError("missing axis (axis.<param> = start:stop:steps)")
    lengths = {len(v) for v in series.values()}
    if len(lengths) > 1:
        raise ConfigError("series lists must have equal lengths")
    entries = tuple(dict(zip(series, vals)) for vals in zip(*series.values())) if series else ({},)
    return SweepSpec(
        scenarios=scenarios,
        fixed=_with_defaults(defaults or {}, fixed, axis, entries),
        axis=axis,
        series=entries,
        validation=Validation(**validation) if validation else None,
        name=meta.get("name", "sweep"),
        title=meta.get("title", ""),
    )


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _write(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)!r}: {exc.strerror or exc}") from exc


def provenance(spec: SweepSpec) -> list[str]:
    """Comment lines describing where a sweep's settings come from."""
    lines = [f"recipe: {spec.name}"]
    if spec.title:
        lines.append(f"title: {spec.title}")
    lines.append("scenarios: " + ",".join(s.code for s in spec.scenarios))
    lines.append("fixed: " + " ".join(f"{k}={_fmt(v)}" for k, v in spec.fixed.items()))
    a = spec.axis
    lines.append(f"axis: {a.name}={_fmt(a.start)}:{_fmt(a.stop)}:{a.steps}:{a.spacing}")
    lines.append(f"assumed: {'true' if spec.is_assumed else 'false'}")
    lines.extend(f"assumed setting: {note}" for note in spec.assumed)
    if spec.validation is not None:
        lines.append(f"validation: samples={spec.validation.samples} seed={spec.validation.seed}")
    return lines


def format_csv(rows: Sequence[ResultRow], comments: Sequence[str] = ()) -> str:
    """CSV text: ``#`` comments, a header, then one line per row.

    Feasible rows are re-checked against their bounds first.
    """
    if not rows:
        raise ValueError("CSV output needs at least one row")
    check_rows(rows)
    cols = ResultRow.columns()
    out = [f"# {c}" for c in comments]
    out.append(",".join(cols))
    for row in rows:
        out.append(",".join(_csv_cell(getattr(row, c)) for c in cols))
    return "\n".join(out) + "\n"


def emit_csv(rows: Sequence[ResultRow], destination, comments: Sequence[str] = ()) -> None:
    """Write :func:`format_csv` output to ``destination``."""
    _write(destination, format_csv(rows, comments))


def _csv_cell(x) -> str:
    s = _fmt(x)
    return f'"{s}"' if ("," in s or '"' in s) else s


@dataclass(frozen=True)
class PlotSpec:
    x: str
    x_label: str = ""
    y: str = "csr"
    y_label: str = "CSR"
    title: str = ""

    @classmethod
    def for_sweep(cls, spec: SweepSpec) -> "PlotSpec":
        return cls(spec.axis.name, LABELS.get(spec.axis.name, spec.axis.name), title=spec.title or spec.name)


_W, _H = 960, 640
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 230, 50, 80
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
_DASHES = ("", "8 4")


def _stroke(k: int) -> tuple[str, str]:
    return _COLORS[k % len(_COLORS)], _DASHES[(k // len(_COLORS)) % len(_DASHES)]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _ticks(lo: float, hi: float) -> np.ndarray:
    return np.linspace(lo, hi, 6)


def emit_svg(rows: Sequence[ResultRow], axes: PlotSpec, destination) -> None:
    """Line plot of ``axes.y`` against ``axes.x``, one polyline per curve.

    Curves are (scenario, series) pairs in order of first appearance.
    """
    if not rows:
        raise ValueError("emit_svg needs at least one row")
    curves: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for row in rows:
        curves.setdefault((row.scenario, row.series), []).append((float(row.value(axes.x)), float(row.value(axes.y))))
    xs = np.array([p[0] for pts in curves.values() for p in pts])
    ys = np.array([p[1] for pts in curves.values() for p in pts])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = 0.0, float(max(ys.max(), 0.0))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x):
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return _TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{_TOP + ph}" x2="{x:.2f}" y2="{_TOP + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_TOP + ph + 22}" font-size="13" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        out.append(f'<line x1="{_LEFT - 6}" y1="{y:.2f}" x2="{_LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 10}" y="{y + 4:.2f}" font-size="13" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 25}" font-size="15" text-anchor="middle">{_esc(axes.x_label or axes.x)}</text>')
    out.append(
        f'<text x="25" y="{_TOP + ph / 2:.1f}" font-size="15" text-anchor="middle" '
        f'transform="rotate(-90 25 {_TOP + ph / 2:.1f})">{_esc(axes.y_label)}</text>'
    )
    if axes.title:
        out.append(f'<text x="{_LEFT + pw / 2:.1f}" y="30" font-size="16" text-anchor="middle">{_esc(axes.title)}</text>')
    for k, ((scenario, series), pts) in enumerate(curves.items()):
        color, dash = _stroke(k)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} points="{coords}"/>')
        ly = _TOP + 20 + 22 * k
        lx = _W - _RIGHT + 15
        label = _esc(f"{scenario} {series}".strip())
        out.append(f'<g class="legend"><line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>'
                   f'<text x="{lx + 36}" y="{ly + 4}" font-size="12">{label}</text></g>')
    out.append("</svg>")
    _write(destination, "\n".join(out) + "\n")

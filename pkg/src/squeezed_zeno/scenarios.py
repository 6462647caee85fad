"""Scenario definitions, config files and tabular runners.

A config file is UTF-8 INI text with one ``[scenario.NAME]`` section per job::

    [scenario.fig2]
    # P+(t) against P+cm(t) at phi = 0
    run = evolve
    scheme = free
    n_bar = 1
    phi = 0
    gamma = 1
    rho_x0 = 0.5
    rho_y0 = -sqrt(1 - 0.5**2)
    rho_z0 = 0
    t_end = 5
    dt = 0.005

Numeric values accept arithmetic with ``pi``, ``sqrt``, ``sin``, ``cos``,
``exp``; ``phi`` additionally accepts the tokens ``phi_Z`` and ``phi_AZ``,
resolved against the initial state. Full key reference is in the README.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import analytic
from .dynamics import (
    TimeGrid,
    bloch_rhs_free,
    bloch_rhs_indirect,
    bloch_rhs_projective,
    collapse_bloch,
    fit_decay_rate,
    integrate,
    propagate_affine,
)
from .measurement import McConfig, repeated_measurement_evolution, sequential_survival, stochastic_survival_curve
from .states import BlochState, SqueezedBathParams, StateError, bloch_state, make_params

COLUMNS = ("t", "tau", "rho_x", "rho_y", "rho_z", "p_plus", "p_plus_cm")
RUN_KINDS = ("evolve", "table1", "zeno_compare", "phase_scan")
PRESET_DIR = Path(__file__).with_name("presets")


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the section, key and line."""


# --- measurement schemes ---------------------------------------------------


@dataclass(frozen=True)
class Free:
    name = "free"


@dataclass(frozen=True)
class ProjectiveContinuous:
    name = "projective"


@dataclass(frozen=True)
class RepeatedProjective:
    dt: float
    name = "repeated"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("measurement interval must be > 0")


@dataclass(frozen=True)
class Indirect:
    T0: float
    name = "indirect"

    def __post_init__(self):
        if not self.T0 > 0:
            raise ValueError("T0 must be > 0")


MeasurementScheme = Union[Free, ProjectiveContinuous, RepeatedProjective, Indirect]


@dataclass(frozen=True)
class Scenario:
    """One evolution run. ``mc`` is set exactly when the scheme is repeated measurement."""

    params: SqueezedBathParams
    b0: BlochState
    scheme: MeasurementScheme
    grid: TimeGrid
    mc: Optional[McConfig] = None
    outputs: tuple[str, ...] = COLUMNS
    method: str = "analytic"

    def __post_init__(self):
        if isinstance(self.scheme, RepeatedProjective) != (self.mc is not None):
            raise ValueError("mc config must be given exactly when the scheme is repeated measurement")
        bad = [c for c in self.outputs if c not in COLUMNS]
        if bad:
            raise ValueError(f"unknown output columns {bad}")
        if self.method not in ("analytic", "rk4", "exact"):
            raise ValueError(f"method must be analytic, rk4 or exact, got {self.method!r}")
        if self.method == "analytic" and isinstance(self.scheme, Indirect):
            raise ValueError("indirect measurement has no closed form; use method = rk4 or exact")


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


@dataclass(frozen=True)
class Job:
    """A named config section: a run kind plus its base scenario and extras."""

    name: str
    kind: str
    scenario: Scenario
    extras: dict = field(default_factory=dict)


# --- config parsing ----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp}
_NAMES = {"pi": math.pi}


def eval_number(text: str) -> float:
    """Evaluate a small arithmetic expression without ``eval``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def resolve_phi(text: str, b0) -> float:
    token = text.strip()
    if token == "phi_Z":
        return analytic.critical_phase_zeno(b0)
    if token == "phi_AZ":
        return analytic.critical_phase_antizeno(b0)
    return eval_number(token)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index, section = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([A-Za-z_][\w]*)\s*[=:]", line)
        if m and section is not None:
            index[(section, m.group(1))] = lineno
    return index


class _Section:
    def __init__(self, name, section, lines, source):
        self.name, self.section, self.lines, self.source = name, section, lines, source

    def fail(self, key, msg):
        line = self.lines.get((self.name, key))
        where = f"{self.source}:{line}: " if line else f"{self.source}: "
        raise ConfigError(f"{where}[{self.name}] {key}: {msg}")

    def raw(self, key, default=None):
        if key in self.section:
            return self.section[key]
        if default is None:
            self.fail(key, "missing required key")
        return default

    def number(self, key, default=None):
        text = self.raw(key, default)
        try:
            return eval_number(str(text))
        except ValueError as exc:
            self.fail(key, str(exc))

    def integer(self, key, default=None):
        text = str(self.raw(key, default)).strip()
        if re.fullmatch(r"[+-]?\d+", text):
            return int(text)
        value = self.number(key, default)
        if value != int(value):
            self.fail(key, f"expected an integer, got {value}")
        return int(value)


def parse_config(text: str, source: str = "<config>", seed: Optional[int] = None, dt: Optional[float] = None, steps: Optional[int] = None) -> list[Job]:
    """Parse config text into jobs; ``seed``/``dt``/``steps`` override every section."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    lines = _line_index(text)
    jobs = []
    for name in cp.sections():
        if not name.startswith("scenario."):
            raise ConfigError(f"{source}:{lines.get((name, ''), '')} unexpected section [{name}]; use [scenario.NAME]")
        jobs.append(_parse_section(_Section(name, cp[name], lines, source), seed, dt, steps))
    if not jobs:
        raise ConfigError(f"{source}: no [scenario.NAME] sections found")
    return jobs


def _parse_section(sec: _Section, seed, dt_override, steps_override) -> Job:
    kind = sec.raw("run", "evolve").strip()
    if kind not in RUN_KINDS:
        sec.fail("run", f"expected one of {', '.join(RUN_KINDS)}")
    try:
        b0 = bloch_state(sec.number("rho_x0"), sec.number("rho_y0", "0"), sec.number("rho_z0", "0"))
    except StateError as exc:
        sec.fail("rho_x0", str(exc))
    phi_expr = sec.raw("phi", "0").strip()
    try:
        phi = resolve_phi(phi_expr, b0)
    except (ValueError, StateError) as exc:
        sec.fail("phi", str(exc))
    try:
        params = make_params(sec.number("n_bar"), phi, sec.number("gamma", "1"))
    except StateError as exc:
        sec.fail("n_bar", str(exc))

    dt = dt_override if dt_override is not None else sec.number("dt", "0.001")
    if not dt > 0:
        sec.fail("dt", "must be > 0")
    if steps_override is not None:
        n_steps = steps_override
    elif "steps" in sec.section:
        n_steps = sec.integer("steps")
    else:
        n_steps = int(round(sec.number("t_end", "5") / dt))
    if n_steps < 1:
        sec.fail("t_end", "grid needs at least one step")
    grid = TimeGrid(0.0, dt, n_steps)

    scheme_name = sec.raw("scheme", "free").strip()
    mc = None
    if scheme_name == "free":
        scheme = Free()
    elif scheme_name == "projective":
        scheme = ProjectiveContinuous()
    elif scheme_name == "repeated":
        mc_dt = sec.number("mc_dt", str(dt))
        if not mc_dt > 0:
            sec.fail("mc_dt", "must be > 0")
        scheme = RepeatedProjective(mc_dt)
        ratio = grid.dt / mc_dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            sec.fail("dt", f"output dt {grid.dt} must be a whole multiple of mc_dt {mc_dt}")
        mc_seed = seed if seed is not None else sec.integer("seed", "0")
        try:
            mc = McConfig(dt=mc_dt, n_steps=int(round(ratio)) * grid.n_steps, n_traj=sec.integer("n_traj", "1"), seed=mc_seed)
        except ValueError as exc:
            sec.fail("n_traj", str(exc))
    elif scheme_name == "indirect":
        T0 = sec.number("T0")
        if not T0 > 0:
            sec.fail("T0", "must be > 0")
        scheme = Indirect(T0)
    else:
        sec.fail("scheme", "expected free, projective, repeated or indirect")

    outputs_raw = sec.raw("outputs", ",".join(COLUMNS))
    outputs = tuple(c.strip() for c in outputs_raw.split(",") if c.strip())
    unknown = [c for c in outputs if c not in COLUMNS]
    if unknown:
        sec.fail("outputs", f"unknown columns {unknown}")
    outputs = tuple(c for c in COLUMNS if c in outputs)
    method = sec.raw("method", "rk4" if isinstance(scheme, Indirect) else "analytic").strip()
    try:
        scenario = Scenario(params, b0, scheme, grid, mc, outputs, method)
    except ValueError as exc:
        sec.fail("method", str(exc))

    extras = {}
    if kind == "phase_scan":
        extras = {
            "phi_min": sec.number("phi_min", "0"),
            "phi_max": sec.number("phi_max", "2*pi"),
            "phi_points": sec.integer("phi_points", "101"),
        }
        if extras["phi_points"] < 1:
            sec.fail("phi_points", "must be >= 1")
    elif kind == "table1":
        raw = sec.raw("n_values", repr(float(params.n_bar)))
        try:
            extras = {"n_values": tuple(eval_number(v) for v in raw.split(",") if v.strip())}
        except ValueError as exc:
            sec.fail("n_values", str(exc))
        if any(n < 0 for n in extras["n_values"]):
            sec.fail("n_values", "photon numbers must be >= 0")
    elif kind == "zeno_compare":
        extras = {"mc_dt": sec.number("mc_dt", str(dt))}
        ratio = dt / extras["mc_dt"]
        if not extras["mc_dt"] > 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            sec.fail("mc_dt", "must be > 0 and divide dt")

    known = {"run", "scheme", "n_bar", "phi", "gamma", "rho_x0", "rho_y0", "rho_z0", "t_end", "dt", "steps",
             "mc_dt", "n_traj", "seed", "T0", "outputs", "method", "phi_min", "phi_max", "phi_points", "n_values"}
    for key in sec.section:
        if key not in known:
            sec.fail(key, "unknown key")
    return Job(sec.name.split(".", 1)[1], kind, scenario, extras)


def load_config(path, **overrides) -> list[Job]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path), **overrides)


def load_preset(name: str, **overrides) -> list[Job]:
    """Load one of the shipped presets: ``fig1`` .. ``fig6`` or ``table1``."""
    path = PRESET_DIR / f"{name}.ini"
    if not path.exists():
        raise ConfigError(f"no preset named {name!r}")
    return load_config(path, **overrides)


def job_to_config(job: Job) -> str:
    """Serialise a job so that :func:`parse_config` reproduces it exactly."""
    s = job.scenario
    lines = [
        f"[scenario.{job.name}]",
        f"run = {job.kind}",
        f"scheme = {s.scheme.name}",
        f"n_bar = {float(s.params.n_bar)!r}",
        f"phi = {float(s.params.phi)!r}",
        f"gamma = {float(s.params.gamma)!r}",
        f"rho_x0 = {s.b0.rho_x!r}",
        f"rho_y0 = {s.b0.rho_y!r}",
        f"rho_z0 = {s.b0.rho_z!r}",
        f"dt = {s.grid.dt!r}",
        f"steps = {s.grid.n_steps}",
        f"outputs = {', '.join(s.outputs)}",
        f"method = {s.method}",
    ]
    if isinstance(s.scheme, RepeatedProjective):
        lines += [f"mc_dt = {s.mc.dt!r}", f"n_traj = {s.mc.n_traj}", f"seed = {s.mc.seed}"]
    if isinstance(s.scheme, Indirect):
        lines.append(f"T0 = {s.scheme.T0!r}")
    for key, value in job.extras.items():
        if key == "n_values":
            value = ", ".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# --- runners ------------------------------------------------------------------


def _rhs_for(s: Scenario):
    if isinstance(s.scheme, Indirect):
        return partial(bloch_rhs_indirect, s.params, s.scheme.T0)
    if isinstance(s.scheme, ProjectiveContinuous):
        return partial(bloch_rhs_projective, s.params)
    return partial(bloch_rhs_free, s.params)


def evolve_states(s: Scenario) -> np.ndarray:
    """Bloch vectors on the scenario grid, shape ``(n_steps + 1, 3)``."""
    t = s.grid.times
    b0 = np.asarray(s.b0)
    if isinstance(s.scheme, RepeatedProjective):
        traj = repeated_measurement_evolution(s.params, b0, s.mc)
        stride = s.mc.n_steps // s.grid.n_steps
        return traj.states[::stride]
    if isinstance(s.scheme, ProjectiveContinuous):
        # Monitoring starts with a collapse at t = 0.
        b0 = collapse_bloch(b0)
    if s.method == "analytic":
        if isinstance(s.scheme, ProjectiveContinuous):
            x = analytic.measured_solution(s.params, b0[0], t)
            return np.stack([x, np.zeros_like(x), np.zeros_like(x)], axis=-1)
        return analytic.free_solution(s.params, b0, t)
    engine = integrate if s.method == "rk4" else propagate_affine
    return engine(_rhs_for(s), b0, s.grid).states


def run_scenario(s: Scenario) -> Table:
    """Tabulate ``t, tau, rho_x, rho_y, rho_z, p_plus, p_plus_cm`` (restricted to ``s.outputs``).

    ``p_plus_cm`` is the all-+1 survival probability: closed form for the
    free and continuously monitored schemes, and for repeated measurement
    the exact finite-interval product (or its Monte Carlo estimate when
    ``n_traj > 1``). It is not defined for indirect measurement and omitted.
    """
    t = s.grid.times
    states = evolve_states(s)
    data = {
        "t": t,
        "tau": s.params.gamma * t,
        "rho_x": states[:, 0],
        "rho_y": states[:, 1],
        "rho_z": states[:, 2],
        "p_plus": 0.5 * (1.0 + states[:, 0]),
    }
    if isinstance(s.scheme, RepeatedProjective):
        stride = s.mc.n_steps // s.grid.n_steps
        if s.mc.n_traj > 1:
            curve = stochastic_survival_curve(s.params, np.asarray(s.b0), s.mc)
            data["p_plus_cm"] = curve[::stride]
        else:
            data["p_plus_cm"] = np.array(
                [sequential_survival(s.params, s.b0, replace(s.mc, n_steps=k * stride)) for k in range(s.grid.n_steps + 1)]
            )
    elif not isinstance(s.scheme, Indirect):
        data["p_plus_cm"] = np.asarray(analytic.p_plus_continuous(s.params, s.b0, t))
    cols = [c for c in s.outputs if c in data]
    return Table(cols, [list(row) for row in zip(*(data[c].tolist() for c in cols))])


TABLE1_COLUMNS = ["n_bar", "gamma", "row", "phi", "rate_x", "rate_y", "fit_rate_x", "fit_rate_y"]


def table1_rows(p: SqueezedBathParams, b0) -> list[tuple[str, float, float, float]]:
    """``(label, phi, rho_x rate, rho_y rate)`` for the four purely exponential phases."""
    r = analytic.decay_rates(p)
    return [
        ("phi=0", 0.0, r.fast, r.slow),
        ("phi=pi", math.pi, r.slow, r.fast),
        ("phi_Z", analytic.critical_phase_zeno(b0), r.fast, r.fast),
        ("phi_AZ", analytic.critical_phase_antizeno(b0), r.slow, r.slow),
    ]


def run_table1(n_values, b0, gamma: float = 1.0, dt: float = 1e-3) -> Table:
    """Analytic rates at the four exponential phases next to rates fitted from RK4 trajectories.

    Each trajectory runs to ``1 / slowest rate`` so that the default fit
    window of :func:`.dynamics.fit_decay_rate` is fully covered.
    """
    b0 = np.asarray(b0, dtype=float)
    table = Table(list(TABLE1_COLUMNS))
    for n in n_values:
        base = make_params(n, 0.0, gamma)
        for label, phi, rx, ry in table1_rows(base, b0):
            p = base.with_phi(phi)
            grid = TimeGrid.spanning(1.0 / min(rx, ry), dt)
            traj = integrate(partial(bloch_rhs_free, p), b0, grid)
            table.rows.append([float(n), float(gamma), label, float(p.phi), float(rx), float(ry),
                               fit_decay_rate(traj, "x"), fit_decay_rate(traj, "y")])
    return table


ZENO_COLUMNS = ["phi_label", "phi", "t", "tau", "rho_x_free", "rho_x_monitored", "rho_x_repeated"]


def run_zeno_compare(p: SqueezedBathParams, b0, grid: TimeGrid, mc_dt: Optional[float] = None) -> Table:
    """Undisturbed against monitored ``rho_x`` at ``phi = 0``, ``phi_Z`` and ``phi_AZ``.

    ``rho_x_repeated`` comes from non-selective measurements every ``mc_dt``
    (defaults to the grid step), which must divide the grid step.
    """
    b0 = np.asarray(b0, dtype=float)
    mc_dt = grid.dt if mc_dt is None else mc_dt
    stride = int(round(grid.dt / mc_dt))
    t = grid.times
    table = Table(list(ZENO_COLUMNS))
    phases = [("phi=0", 0.0), ("phi_Z", analytic.critical_phase_zeno(b0)), ("phi_AZ", analytic.critical_phase_antizeno(b0))]
    for label, phi in phases:
        q = p.with_phi(phi)
        free_x = analytic.free_solution(q, b0, t)[:, 0]
        monitored = analytic.measured_solution(q, b0[0], t)
        repeated = repeated_measurement_evolution(q, b0, McConfig(mc_dt, stride * grid.n_steps)).rho_x[::stride]
        for row in zip(t, free_x, monitored, repeated):
            table.rows.append([label, float(q.phi), float(row[0]), float(q.gamma * row[0]),
                               float(row[1]), float(row[2]), float(row[3])])
    return table


def phase_grid(phi_min: float, phi_max: float, n: int) -> np.ndarray:
    return np.linspace(phi_min, phi_max, n)


def run_phase_scan(s: Scenario, phis) -> Table:
    """Free-evolution columns over a ``(phi, t)`` grid; rows sorted by ``(phi, t)``.

    ``phi`` is reported as given (the scan may extend beyond ``(-pi, pi]``).
    """
    table = None
    for phi in sorted(float(v) for v in phis):
        part = run_scenario(replace(s, params=s.params.with_phi(phi)))
        if table is None:
            table = Table(["phi"] + part.columns)
        table.rows.extend([phi] + row for row in part.rows)
    return table


def execute(job: Job) -> Table:
    s = job.scenario
    if job.kind == "evolve":
        return run_scenario(s)
    if job.kind == "table1":
        return run_table1(job.extras["n_values"], s.b0, float(s.params.gamma), s.grid.dt)
    if job.kind == "zeno_compare":
        return run_zeno_compare(s.params, s.b0, s.grid, job.extras["mc_dt"])
    if job.kind == "phase_scan":
        e = job.extras
        return run_phase_scan(s, phase_grid(e["phi_min"], e["phi_max"], e["phi_points"]))
    raise ValueError(f"unknown run kind {job.kind!r}")

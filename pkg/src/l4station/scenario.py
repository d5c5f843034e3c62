"""Scenario files, single runs, basin sweeps and their output files.

Scenario files are JSON with SI values throughout::

    {
      "name": "case1",
      "system":        {"k": 6.673e-11, "m1": 5.972e24, "m2": 7.34767e22, "separation": 3.844e8},
      "objective":     {"d": 1e4, "L_d": [0, 0, 8e7], "beta": 1e-11, "a": 1e4, "u_max": 500},
      "initial_state": {"r_cs": [1e5, 0, 0], "v_cs": [0, 8000, 0]},
      "integrator":    {"step": null, "t_end": 97200, "sample_stride": 50},
      "output":        {"trajectory": "case1_trajectory.csv", "summary": "case1_summary.json"}
    }

``integrator.step`` may be omitted or null to use ``default_step``;
``sample_stride`` defaults to 1, ``name`` to the file stem and the output
names to ``<name>_trajectory.csv`` / ``<name>_summary.json``.
``output.inertial`` optionally names a barycentric inertial-frame export.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .dynamics import R_MIN, SpacecraftState
from .errors import ConfigError, InvalidParameterError, L4StationError, OutputError
from .geometry import ThreeBodySystem, coriolis_matrix_apply, norm, synodic_to_inertial
from .integrator import (
    ANG_MOM_TOL,
    COMPLETED,
    RADIUS_TOL,
    IntegratorSettings,
    SimulationResult,
    Trajectory,
    default_step,
    detect_capture,
    simulate,
)
from .lyapunov import ControlObjective

TRAJECTORY_COLUMNS = (
    "t", "rx", "ry", "rz", "vx", "vy", "vz", "ux", "uy", "uz",
    "saturated", "V", "dVdt", "e1_norm", "radius_err_frac", "ang_mom_err", "eps1", "eps2",
)
INERTIAL_COLUMNS = ("t", "x", "y", "z", "vx", "vy", "vz")
STATE_AXES = ("rx", "ry", "rz", "vx", "vy", "vz")
BUNDLED = ("case1", "case2")

EXIT_CAPTURED = 0
EXIT_NOT_CAPTURED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class OutputPaths:
    trajectory: str | None
    summary: str | None
    inertial: str | None = None


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    system: ThreeBodySystem
    objective: ControlObjective
    initial_state: SpacecraftState
    integrator: IntegratorSettings
    output: OutputPaths

    def to_dict(self) -> dict[str, Any]:
        obj = self.objective
        return {
            "name": self.name,
            "system": {
                "k": self.system.k,
                "m1": self.system.m1,
                "m2": self.system.m2,
                "separation": self.system.separation,
            },
            "objective": {
                "d": obj.d,
                "L_d": obj.L_d.tolist(),
                "beta": obj.beta,
                "a": obj.a,
                "u_max": obj.u_max,
            },
            "initial_state": {
                "r_cs": self.initial_state.r_cs.tolist(),
                "v_cs": self.initial_state.v_cs.tolist(),
            },
            "integrator": {
                "step": self.integrator.step,
                "t_end": self.integrator.t_end,
                "sample_stride": self.integrator.sample_stride,
            },
            "output": {
                "trajectory": self.output.trajectory,
                "summary": self.output.summary,
                "inertial": self.output.inertial,
            },
        }

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def with_initial_state(self, r_cs, v_cs) -> "ScenarioConfig":
        return ScenarioConfig(
            self.name, self.system, self.objective,
            SpacecraftState(r_cs, v_cs, 0.0), self.integrator, self.output,
        )


# -- parsing ---------------------------------------------------------------

def _section(data, key: str, path: str, required: bool = True) -> dict:
    if key not in data:
        if required:
            raise ConfigError("missing required section", key=f"{path}{key}")
        return {}
    value = data[key]
    if not isinstance(value, dict):
        raise ConfigError("must be an object", key=f"{path}{key}")
    return value


def _reject_unknown(section: dict, allowed, path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError("unknown key", key=f"{path}.{key}")


def _number(section: dict, key: str, path: str, *, required=True, default=None, positive=True):
    full = f"{path}.{key}"
    if key not in section or section[key] is None:
        if required:
            raise ConfigError("missing required key", key=full)
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", key=full)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"must be finite, got {value!r}", key=full)
    if positive and value <= 0.0:
        raise ConfigError(f"must be positive, got {value!r}", key=full)
    return value


def _vector(section: dict, key: str, path: str) -> list[float]:
    full = f"{path}.{key}"
    if key not in section:
        raise ConfigError("missing required key", key=full)
    value = section[key]
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"must be a list of 3 numbers, got {value!r}", key=full)
    out = []
    for x in value:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(float(x)):
            raise ConfigError(f"must be a list of 3 finite numbers, got {value!r}", key=full)
        out.append(float(x))
    return out


def scenario_from_dict(data: dict, default_name: str = "scenario") -> ScenarioConfig:
    """Validate a parsed scenario mapping and fill documented defaults."""
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    _reject_unknown(data, ("name", "system", "objective", "initial_state", "integrator", "output"), "")

    name = data.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise ConfigError("must be a non-empty string", key="name")

    s = _section(data, "system", "")
    _reject_unknown(s, ("k", "m1", "m2", "separation"), "system")
    system = ThreeBodySystem(
        k=_number(s, "k", "system"),
        m1=_number(s, "m1", "system"),
        m2=_number(s, "m2", "system"),
        separation=_number(s, "separation", "system"),
    )

    o = _section(data, "objective", "")
    _reject_unknown(o, ("d", "L_d", "beta", "a", "u_max"), "objective")
    L_d = _vector(o, "L_d", "objective")
    if not any(L_d):
        raise ConfigError("must be a non-zero vector", key="objective.L_d")
    objective = ControlObjective(
        d=_number(o, "d", "objective"),
        L_d=L_d,
        beta=_number(o, "beta", "objective"),
        a=_number(o, "a", "objective"),
        u_max=_number(o, "u_max", "objective"),
    )

    st = _section(data, "initial_state", "")
    _reject_unknown(st, ("r_cs", "v_cs"), "initial_state")
    initial = SpacecraftState(_vector(st, "r_cs", "initial_state"), _vector(st, "v_cs", "initial_state"), 0.0)
    if norm(initial.r_cs) < R_MIN:
        raise ConfigError(f"initial radius must be at least {R_MIN} m", key="initial_state.r_cs")

    it = _section(data, "integrator", "")
    _reject_unknown(it, ("step", "t_end", "sample_stride"), "integrator")
    step = _number(it, "step", "integrator", required=False)
    if step is None:
        step = default_step(system, objective)
    t_end = _number(it, "t_end", "integrator", positive=False)
    if t_end < 0.0:
        raise ConfigError(f"must be non-negative, got {t_end!r}", key="integrator.t_end")
    stride = it.get("sample_stride", 1)
    if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
        raise ConfigError(f"must be an integer >= 1, got {stride!r}", key="integrator.sample_stride")
    settings = IntegratorSettings(step=step, t_end=t_end, sample_stride=stride)

    out = _section(data, "output", "", required=False)
    _reject_unknown(out, ("trajectory", "summary", "inertial"), "output")
    for key in ("trajectory", "summary", "inertial"):
        if out.get(key) is not None and not isinstance(out[key], str):
            raise ConfigError("must be a path string or null", key=f"output.{key}")
    output = OutputPaths(
        trajectory=out.get("trajectory", f"{name}_trajectory.csv"),
        summary=out.get("summary", f"{name}_summary.json"),
        inertial=out.get("inertial"),
    )
    return ScenarioConfig(name, system, objective, initial, settings, output)


def bundled_scenario_path(name: str) -> Path:
    if name not in BUNDLED:
        raise ConfigError(f"no bundled scenario {name!r}; choose from {', '.join(BUNDLED)}")
    return Path(str(resources.files("l4station") / "scenarios" / f"{name}.json"))


def _resolve_path(path) -> Path:
    p = Path(path)
    if not p.exists() and p.suffix == "" and str(path) in BUNDLED:
        return bundled_scenario_path(str(path))
    return p


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def load_scenario(path) -> ScenarioConfig:
    """Load and validate a scenario file (or a bundled name: case1, case2)."""
    p = _resolve_path(path)
    try:
        return scenario_from_dict(_read_json(p), default_name=p.stem)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def save_scenario(cfg: ScenarioConfig, path) -> Path:
    path = Path(path)
    _write_text(path, json.dumps(cfg.to_dict(), indent=2) + "\n")
    return path


# -- output files ------------------------------------------------------------

def _write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc


def _samples_of(result) -> Trajectory:
    return result.samples if isinstance(result, SimulationResult) else result


def write_trajectory_csv(result: SimulationResult | Trajectory, path) -> Path:
    """One row per sample; floats use the shortest round-trip repr."""
    tr = _samples_of(result)
    path = Path(path)
    columns = [
        tr.t, tr.r_cs[:, 0], tr.r_cs[:, 1], tr.r_cs[:, 2],
        tr.v_cs[:, 0], tr.v_cs[:, 1], tr.v_cs[:, 2],
        tr.u_applied[:, 0], tr.u_applied[:, 1], tr.u_applied[:, 2],
        None,
        tr.V, tr.dVdt_chain, tr.e1_norm, tr.radius_err_frac, tr.ang_mom_err, tr.eps1, tr.eps2,
    ]
    text_cols = [
        (["1" if s else "0" for s in tr.saturated] if c is None else [repr(x) for x in c.tolist()])
        for c in columns
    ]
    lines = [",".join(TRAJECTORY_COLUMNS)]
    lines.extend(",".join(row) for row in zip(*text_cols))
    _write_text(path, "\n".join(lines) + "\n")
    return path


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if tuple(header) != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected trajectory header {header}")
    if not rows:
        return {name: np.empty(0) for name in header}
    data = np.array([[float(x) for x in row] for row in rows])
    return {name: data[:, i] for i, name in enumerate(header)}


def write_inertial_csv(result: SimulationResult | Trajectory, sys: ThreeBodySystem, path) -> Path:
    """Barycentric inertial position and velocity of the spacecraft."""
    tr = _samples_of(result)
    r_b = sys.r_c + tr.r_cs
    v_b = tr.v_cs + coriolis_matrix_apply(sys, r_b)
    r_i = synodic_to_inertial(sys, r_b, tr.t)
    v_i = synodic_to_inertial(sys, v_b, tr.t)
    data = np.column_stack([tr.t, r_i, v_i]) if len(tr) else np.empty((0, 7))
    lines = [",".join(INERTIAL_COLUMNS)]
    lines.extend(",".join(repr(x) for x in row) for row in data.tolist())
    _write_text(Path(path), "\n".join(lines) + "\n")
    return Path(path)


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def summarize(result: SimulationResult, wall_time: float, name: str = "") -> dict[str, Any]:
    tr = result.samples
    max_eps = float(np.max(np.maximum(np.abs(tr.eps1), np.abs(tr.eps2)))) if len(tr) else None
    return {
        "name": name,
        "status": result.status,
        "message": result.message,
        "captured": result.captured,
        "capture_time": result.capture_time,
        "final_radius_err_frac": _finite_or_none(result.final_radius_err_frac),
        "final_ang_mom_err_frac": _finite_or_none(result.final_ang_mom_err_frac),
        "monotonicity_violations": result.monotonicity_violations,
        "max_control_norm": result.max_control_norm,
        "max_abs_eps": max_eps,
        "n_samples": len(tr),
        "final_time": float(tr.t[-1]) if len(tr) else None,
        "wall_time": wall_time,
    }


def exit_code(result: SimulationResult) -> int:
    if result.status != COMPLETED:
        return EXIT_RUNTIME
    return EXIT_CAPTURED if result.captured else EXIT_NOT_CAPTURED


@dataclass
class ScenarioRun:
    result: SimulationResult
    summary: dict[str, Any]
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return exit_code(self.result)


def _output_path(name: str | None, out_dir) -> Path | None:
    if name is None:
        return None
    p = Path(name)
    return p if out_dir is None or p.is_absolute() else Path(out_dir) / p


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> ScenarioRun:
    """Simulate ``cfg`` and write its trajectory CSV and summary JSON."""
    t0 = time.perf_counter()
    result = simulate(cfg.system, cfg.objective, cfg.initial_state, cfg.integrator)
    wall = time.perf_counter() - t0
    summary = summarize(result, wall, cfg.name)
    files = {}
    traj_path = _output_path(cfg.output.trajectory, out_dir)
    if traj_path is not None:
        files["trajectory"] = write_trajectory_csv(result, traj_path)
    inertial_path = _output_path(cfg.output.inertial, out_dir)
    if inertial_path is not None:
        files["inertial"] = write_inertial_csv(result, cfg.system, inertial_path)
    summary_path = _output_path(cfg.output.summary, out_dir)
    if summary_path is not None:
        _write_text(summary_path, json.dumps(summary, indent=2) + "\n")
        files["summary"] = summary_path
    return ScenarioRun(result, summary, files)


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class GridAxis:
    name: str
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepConfig:
    base: ScenarioConfig
    axes: tuple[GridAxis, ...]
    radius_tol: float = RADIUS_TOL
    ang_mom_tol: float = ANG_MOM_TOL
    window: float | None = None
    output: str = "basin.csv"

    def points(self) -> list[tuple[int, dict[str, float]]]:
        """Grid points in lexicographic order of the axes as listed."""
        grids = [axis.values() for axis in self.axes]
        names = [axis.name for axis in self.axes]
        return [
            (i, dict(zip(names, (float(x) for x in combo))))
            for i, combo in enumerate(itertools.product(*grids))
        ]


def sweep_from_dict(data: dict, base_dir: Path = Path(".")) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("sweep must be a JSON object")
    _reject_unknown(data, ("base", "grid", "capture", "output"), "")
    if "base" not in data:
        raise ConfigError("missing required key", key="base")
    base = data["base"]
    if isinstance(base, str):
        p = Path(base)
        base_cfg = load_scenario(p if p.is_absolute() or base in BUNDLED else base_dir / p)
    elif isinstance(base, dict):
        base_cfg = scenario_from_dict(base)
    else:
        raise ConfigError("must be a scenario path, bundled name or object", key="base")

    grid = _section(data, "grid", "")
    if not grid:
        raise ConfigError("must name at least one axis", key="grid")
    axes = []
    for name, axis_def in grid.items():
        path = f"grid.{name}"
        if name not in STATE_AXES:
            raise ConfigError(f"unknown axis; choose from {', '.join(STATE_AXES)}", key=path)
        if not isinstance(axis_def, dict):
            raise ConfigError("must be an object with min, max, count", key=path)
        _reject_unknown(axis_def, ("min", "max", "count"), path)
        lo = _number(axis_def, "min", path, positive=False)
        hi = _number(axis_def, "max", path, positive=False)
        count = axis_def.get("count")
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(f"must be an integer >= 1, got {count!r}", key=f"{path}.count")
        axes.append(GridAxis(name, lo, hi, count))

    cap = _section(data, "capture", "", required=False)
    _reject_unknown(cap, ("radius_tol", "ang_mom_tol", "window"), "capture")
    out = _section(data, "output", "", required=False)
    _reject_unknown(out, ("basin",), "output")
    return SweepConfig(
        base=base_cfg,
        axes=tuple(axes),
        radius_tol=_number(cap, "radius_tol", "capture", required=False, default=RADIUS_TOL),
        ang_mom_tol=_number(cap, "ang_mom_tol", "capture", required=False, default=ANG_MOM_TOL),
        window=_number(cap, "window", "capture", required=False),
        output=out.get("basin", "basin.csv"),
    )


def load_sweep(path) -> SweepConfig:
    p = Path(path)
    try:
        return sweep_from_dict(_read_json(p), base_dir=p.parent)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


BASIN_COLUMNS = (
    "index", *STATE_AXES, "status", "captured", "capture_time",
    "final_radius_err_frac", "final_ang_mom_err_frac", "max_abs_eps",
    "monotonicity_violations", "max_control_norm", "message",
)


def _run_point(cfg: SweepConfig, index: int, overrides: dict[str, float]) -> dict[str, Any]:
    base = cfg.base.initial_state
    state = dict(zip(STATE_AXES, [*base.r_cs.tolist(), *base.v_cs.tolist()]))
    state.update(overrides)
    row: dict[str, Any] = {"index": index, **state}
    try:
        point = cfg.base.with_initial_state(
            [state["rx"], state["ry"], state["rz"]], [state["vx"], state["vy"], state["vz"]]
        )
        result = simulate(point.system, point.objective, point.initial_state, point.integrator)
    except (L4StationError, ArithmeticError, ValueError) as exc:
        row.update(status="error", captured=False, capture_time=None,
                   final_radius_err_frac=None, final_ang_mom_err_frac=None,
                   max_abs_eps=None, monotonicity_violations=None, max_control_norm=None)
        row["message"] = str(exc)
        return row
    tr = result.samples
    capture = detect_capture(tr, cfg.base.objective, cfg.radius_tol, cfg.ang_mom_tol, cfg.window)
    row.update(
        status=result.status,
        captured=capture is not None,
        capture_time=capture,
        final_radius_err_frac=_finite_or_none(result.final_radius_err_frac),
        final_ang_mom_err_frac=_finite_or_none(result.final_ang_mom_err_frac),
        max_abs_eps=float(np.max(np.maximum(np.abs(tr.eps1), np.abs(tr.eps2)))) if len(tr) else None,
        monotonicity_violations=result.monotonicity_violations,
        max_control_norm=result.max_control_norm,
        message=result.message,
    )
    return row


def _run_point_packed(args):
    return _run_point(*args)


def evaluate_points(cfg: SweepConfig, points, parallel: int = 1) -> list[dict[str, Any]]:
    """Run each grid point independently; rows come back sorted by index."""
    jobs = [(cfg, i, overrides) for i, overrides in points]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_run_point_packed, jobs))
    else:
        rows = [_run_point(*job) for job in jobs]
    return sorted(rows, key=lambda row: row["index"])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str) and ("," in value or '"' in value):
        return '"' + value.replace('"', '""') + '"'
    return str(value)


def write_basin_csv(rows, path) -> Path:
    lines = [",".join(BASIN_COLUMNS)]
    lines.extend(",".join(_cell(row.get(col)) for col in BASIN_COLUMNS) for row in rows)
    _write_text(Path(path), "\n".join(lines) + "\n")
    return Path(path)


def run_sweep(cfg: SweepConfig, out_dir=None, parallel: int = 1) -> tuple[list[dict[str, Any]], Path]:
    """One simulation per grid point, aggregated into a basin CSV."""
    rows = evaluate_points(cfg, cfg.points(), parallel=parallel)
    path = _output_path(cfg.output, out_dir)
    return rows, write_basin_csv(rows, path)

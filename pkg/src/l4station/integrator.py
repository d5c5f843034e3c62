"""Fixed-step RK4 propagation of the closed loop, telemetry and capture detection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import _kernel
from .controller import compute_control
from .dynamics import R_MIN, SpacecraftState, controlled_dynamics, epsilons, natural_dynamics
from .errors import DegenerateRadiusError, InvalidParameterError, SingularityError
from .geometry import ThreeBodySystem, norm
from .lyapunov import (
    ControlObjective,
    angular_momentum_error,
    dVdt_chain,
    lyapunov_value,
    momentum_error_e1,
)

RADIUS_TOL = 0.005
ANG_MOM_TOL = 0.01
MONOTONICITY_TOL = 1e-9

COMPLETED = "completed"
GUARD_VIOLATION = "guard_violation"
SINGULARITY = "singularity"


def default_step(sys: ThreeBodySystem, obj: ControlObjective) -> float:
    """min(T/500, 2*pi/(1000*phi_dot)) with T the target-orbit period."""
    return min(obj.nominal_period / 500.0, 2.0 * math.pi / (1000.0 * sys.phi_dot))


@dataclass(frozen=True)
class IntegratorSettings:
    step: float
    t_end: float
    sample_stride: int = 1

    def __post_init__(self):
        step = float(self.step)
        t_end = float(self.t_end)
        if not math.isfinite(step) or step <= 0.0:
            raise InvalidParameterError(f"step must be positive and finite, got {self.step!r}")
        if not math.isfinite(t_end) or t_end < 0.0:
            raise InvalidParameterError(f"t_end must be non-negative and finite, got {self.t_end!r}")
        if isinstance(self.sample_stride, bool) or int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise InvalidParameterError(f"sample_stride must be an integer >= 1, got {self.sample_stride!r}")
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "t_end", t_end)
        object.__setattr__(self, "sample_stride", int(self.sample_stride))

    @property
    def n_steps(self) -> int:
        # tolerate t_end being a float multiple of step
        return int(math.floor(self.t_end / self.step + 1e-9))


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    r_cs: np.ndarray
    v_cs: np.ndarray
    u_applied: np.ndarray
    saturated: bool
    V: float
    dVdt_chain: float
    e1_norm: float
    radius_err_frac: float
    ang_mom_err: float
    eps1: float
    eps2: float


_SCALAR_COLUMNS = ("V", "dVdt_chain", "e1_norm", "radius_err_frac", "ang_mom_err", "eps1", "eps2")


@dataclass(frozen=True)
class Trajectory:
    """Column store of TrajectorySample records, time-ordered."""

    t: np.ndarray
    r_cs: np.ndarray
    v_cs: np.ndarray
    u_applied: np.ndarray
    saturated: np.ndarray
    V: np.ndarray
    dVdt_chain: np.ndarray
    e1_norm: np.ndarray
    radius_err_frac: np.ndarray
    ang_mom_err: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> TrajectorySample:
        return TrajectorySample(
            t=float(self.t[i]),
            r_cs=self.r_cs[i],
            v_cs=self.v_cs[i],
            u_applied=self.u_applied[i],
            saturated=bool(self.saturated[i]),
            **{name: float(getattr(self, name)[i]) for name in _SCALAR_COLUMNS},
        )

    def __iter__(self) -> Iterator[TrajectorySample]:
        return (self[i] for i in range(len(self)))

    @property
    def control_norm(self) -> np.ndarray:
        return norm(self.u_applied)

    @property
    def radius(self) -> np.ndarray:
        return norm(self.r_cs)

    def state(self, i: int) -> SpacecraftState:
        return SpacecraftState(self.r_cs[i], self.v_cs[i], float(self.t[i]))

    @classmethod
    def from_arrays(cls, sys, obj, t, r, v, u, saturated) -> "Trajectory":
        """Record states and applied controls, deriving every audit column."""
        t = np.asarray(t, dtype=np.float64)
        r = np.asarray(r, dtype=np.float64).reshape(-1, 3)
        v = np.asarray(v, dtype=np.float64).reshape(-1, 3)
        u = np.asarray(u, dtype=np.float64).reshape(-1, 3)
        if len(t) == 0:
            empty = np.empty(0)
            return cls(empty, r, v, u, np.empty(0, dtype=bool), *([empty] * len(_SCALAR_COLUMNS)))
        state = SpacecraftState(r, v, t)
        accel = natural_dynamics(sys, state) + u
        e1 = momentum_error_e1(state, obj)
        eps1, eps2 = epsilons(sys, r)
        return cls(
            t=t,
            r_cs=r,
            v_cs=v,
            u_applied=u,
            saturated=np.asarray(saturated, dtype=bool),
            V=lyapunov_value(state, obj),
            dVdt_chain=dVdt_chain(state, accel, obj),
            e1_norm=norm(e1),
            radius_err_frac=(norm(r) - obj.d) / obj.d,
            ang_mom_err=angular_momentum_error(state, obj),
            eps1=np.asarray(eps1),
            eps2=np.asarray(eps2),
        )


@dataclass(frozen=True)
class SimulationResult:
    samples: Trajectory
    capture_time: float | None
    final_radius_err_frac: float
    final_ang_mom_err_frac: float
    monotonicity_violations: int
    max_control_norm: float
    status: str = COMPLETED
    message: str = ""

    @property
    def captured(self) -> bool:
        return self.capture_time is not None

    @property
    def ok(self) -> bool:
        return self.status == COMPLETED


def rk4_step(derivative: Callable[[SpacecraftState], np.ndarray], state: SpacecraftState, h: float) -> SpacecraftState:
    """One classical RK4 step of r'' = derivative(state).

    A DegenerateRadiusError raised by ``derivative`` is re-raised with the
    offending stage number attached.
    """
    if not h > 0.0:
        raise InvalidParameterError(f"step must be positive, got {h!r}")
    r, v, t = state.r_cs, state.v_cs, state.t

    def stage(n, rr, vv, tt):
        try:
            return derivative(SpacecraftState(rr, vv, tt))
        except DegenerateRadiusError as exc:
            raise DegenerateRadiusError(f"RK4 stage {n}: {exc}", stage=n) from exc

    a1 = stage(1, r, v, t)
    r2, v2 = r + 0.5 * h * v, v + 0.5 * h * a1
    a2 = stage(2, r2, v2, t + 0.5 * h)
    r3, v3 = r + 0.5 * h * v2, v + 0.5 * h * a2
    a3 = stage(3, r3, v3, t + 0.5 * h)
    r4, v4 = r + h * v3, v + h * a3
    a4 = stage(4, r4, v4, t + h)
    return SpacecraftState(
        r + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
        v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        t + h,
    )


def detect_capture(
    samples: Trajectory,
    obj: ControlObjective,
    radius_tol: float = RADIUS_TOL,
    ang_mom_tol: float = ANG_MOM_TOL,
    window: float | None = None,
) -> float | None:
    """Earliest sample time from which the orbit stays inside tolerance.

    Every sample in ``[t*, t* + window]`` (default one target period) must
    satisfy both thresholds, and the record must extend to ``t* + window``.
    """
    t = np.asarray(samples.t)
    if len(t) == 0:
        return None
    if window is None:
        window = obj.nominal_period
    inside = (np.abs(samples.radius_err_frac) <= radius_tol) & (
        np.asarray(samples.ang_mom_err) / obj.L_norm <= ang_mom_tol
    )
    # first outside sample at or after each index (len(t) if none)
    idx = np.arange(len(t))
    next_out = np.where(~inside, idx, len(t))
    next_out = np.minimum.accumulate(next_out[::-1])[::-1]
    t_next_out = np.append(t, np.inf)[next_out]
    slack = 1e-9 * max(window, 1.0)
    ok = inside & (t_next_out > t + window) & (t[-1] + slack >= t + window)
    hits = np.flatnonzero(ok)
    return float(t[hits[0]]) if len(hits) else None


def count_monotonicity_violations(V, saturated, rel_tol: float = MONOTONICITY_TOL) -> int:
    """Sample intervals, unsaturated at both ends, on which V grew by > rel_tol*V."""
    V = np.asarray(V)
    sat = np.asarray(saturated, dtype=bool)
    if len(V) < 2:
        return 0
    free = ~sat[:-1] & ~sat[1:]
    return int(np.count_nonzero(free & (np.diff(V) > rel_tol * V[:-1])))


def control_spike_before_capture(
    samples: Trajectory, capture_time: float, period: float, periods: float = 5.0
) -> float | None:
    """Time of the largest interior local maximum of |u| in the approach window.

    The window is ``[capture_time - periods*period, capture_time]``; returns
    None when |u| has no interior peak there.
    """
    t = np.asarray(samples.t)
    un = samples.control_norm
    sel = np.flatnonzero((t >= capture_time - periods * period) & (t <= capture_time))
    if len(sel) < 3:
        return None
    best = None
    for i in sel[1:-1]:
        if un[i] >= un[i - 1] and un[i] >= un[i + 1] and (best is None or un[i] > un[best]):
            best = i
    if best is None or un[best] <= max(un[sel[0]], un[sel[-1]]):
        return None
    return float(t[best])


def _summarize(sys, obj, traj: Trajectory, max_u: float, status: str, message: str) -> SimulationResult:
    if len(traj):
        final_r = float(traj.radius_err_frac[-1])
        final_h = float(traj.ang_mom_err[-1] / obj.L_norm)
    else:
        final_r = final_h = math.nan
    return SimulationResult(
        samples=traj,
        capture_time=detect_capture(traj, obj),
        final_radius_err_frac=final_r,
        final_ang_mom_err_frac=final_h,
        monotonicity_violations=count_monotonicity_violations(traj.V, traj.saturated),
        max_control_norm=float(max_u),
        status=status,
        message=message,
    )


def _simulate_compiled(sys, obj, init, settings, r_min):
    n = settings.n_steps
    stride = settings.sample_stride
    n_rec = n // stride + 2
    rec = np.empty((n_rec, _kernel.N_REC))
    x0 = np.concatenate([init.r_cs, init.v_cs])
    params = _kernel.pack_params(sys, obj, r_min)
    j, st, failed_step, stage, max_u = _kernel.propagate(
        x0, float(init.t), params, settings.step, n, stride, rec
    )
    rec = rec[:j]
    traj = Trajectory.from_arrays(sys, obj, rec[:, 0], rec[:, 1:4], rec[:, 4:7], rec[:, 7:10], rec[:, 10] > 0.5)
    status, message = COMPLETED, ""
    if st != _kernel.OK:
        t_fail = float(init.t) + failed_step * settings.step
        if st == _kernel.GUARD:
            status = GUARD_VIOLATION
            message = f"|r_cs| fell below {r_min} m at RK4 stage {stage} of the step starting t = {t_fail:.6f} s"
        else:
            status = SINGULARITY
            message = f"spacecraft reached a primary at RK4 stage {stage} of the step starting t = {t_fail:.6f} s"
    return traj, max_u, status, message


def _simulate_python(sys, obj, init, settings):
    def closed_loop(s):
        return controlled_dynamics(sys, s, compute_control(sys, s, obj).u_applied)

    n = settings.n_steps
    stride = settings.sample_stride
    rows = []
    max_u = 0.0
    status, message = COMPLETED, ""
    state = init
    for i in range(n + 1):
        t = float(init.t) + i * settings.step
        state = SpacecraftState(state.r_cs, state.v_cs, t)
        try:
            ctrl = compute_control(sys, state, obj)
        except DegenerateRadiusError as exc:
            status, message = GUARD_VIOLATION, f"RK4 stage 1 of the step starting t = {t:.6f} s: {exc}"
            break
        max_u = max(max_u, float(norm(ctrl.u_applied)))
        if i % stride == 0 or i == n:
            rows.append((t, state.r_cs, state.v_cs, ctrl.u_applied, ctrl.saturated))
        if i == n:
            break
        try:
            state = rk4_step(closed_loop, state, settings.step)
        except DegenerateRadiusError as exc:
            status, message = GUARD_VIOLATION, f"step starting t = {t:.6f} s: {exc}"
            break
        except SingularityError as exc:
            status, message = SINGULARITY, f"step starting t = {t:.6f} s: {exc}"
            break
    if rows:
        t, r, v, u, sat = (list(col) for col in zip(*rows))
    else:
        t, r, v, u, sat = [], [], [], [], []
    traj = Trajectory.from_arrays(sys, obj, t, r, v, u, sat)
    return traj, max_u, status, message


def simulate(
    sys: ThreeBodySystem,
    obj: ControlObjective,
    init: SpacecraftState,
    settings: IntegratorSettings,
    *,
    engine: str = "compiled",
) -> SimulationResult:
    """Propagate the saturated closed loop from ``init`` for ``settings.t_end``.

    The control is re-evaluated at every RK4 stage.  ``engine="python"``
    runs the same recurrence through ``rk4_step`` and the array functions;
    it is slow and meant for cross-checks.  A guard or singularity failure
    truncates the record and is reported through ``status``.
    """
    if engine == "compiled":
        traj, max_u, status, message = _simulate_compiled(sys, obj, init, settings, R_MIN)
    elif engine == "python":
        traj, max_u, status, message = _simulate_python(sys, obj, init, settings)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return _summarize(sys, obj, traj, max_u, status, message)
